import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SRZF_NO_EXT", "0") in ("", "0"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("srzf._ckernels", ["src/srzf/_ckernels.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
