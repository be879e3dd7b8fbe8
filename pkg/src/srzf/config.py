"""Plain-text ``key = value`` scenario files.

Lines starting with ``#`` are comments. Lists are comma separated. Keys:

==================  =========================================================
K, N                user count, BS antennas (required)
M_k                 antennas per user: one value or K values (default 2)
P_T_dbm             transmit power grid in dBm (default 30)
sigma2_dbm          noise power in dBm (default -35)
distances           K values in meters, or ``near, far`` for the paired
                    layout (default ``50, 250``)
azimuths            K values in degrees, or ceil(K/2) base azimuths that the
                    far users offset by ``paired_offset``; omitted means an
                    equally spaced grid
angular_spread      departure-angle window per user in degrees (default 0.5)
paired_offset       far-user angular offset in degrees (default 0.5)
n_paths             propagation paths per user (default 10)
diffuse_power       fraction of channel energy in an i.i.d. Rayleigh floor
                    (default 1e-4)
mu2_k               CSI error variance: one value or K values (default 1e-2)
alpha_policy        ``paper_default`` or K explicit values
reg_matrix_policy   ``successive_J``, ``identity`` or M diagonal weights
stack_weighting     ``path_loss`` (precoders see H_k / sqrt(L_k)) or ``none``
seed                master RNG seed (default 0)
n_trials            Monte-Carlo trials (default 200)
duplicate_users     ``i, j`` (1-based): copy user i's channel onto user j
==================  =========================================================

Unknown keys are rejected.
"""

import configparser
from pathlib import Path

from .channel import Scenario, paired_geometry
from .errors import ConfigError

__all__ = ["parse_scenario", "load_scenario", "KEYS"]

KEYS = ("K", "N", "M_k", "P_T_dbm", "sigma2_dbm", "distances", "azimuths",
        "angular_spread", "paired_offset", "n_paths", "diffuse_power", "mu2_k",
        "alpha_policy", "reg_matrix_policy", "stack_weighting", "seed", "n_trials", "duplicate_users")

_SECTION = "scenario"


def _floats(key, text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(key, f"expected numbers, got {text!r}") from None


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _per_user(key, values, K, cast=float):
    if len(values) == 1:
        return tuple(cast(values[0]) for _ in range(K))
    if len(values) != K:
        raise ConfigError(key, f"expected 1 or {K} values, got {len(values)}")
    return tuple(cast(v) for v in values)


def parse_scenario(text: str) -> Scenario:
    """Build a :class:`Scenario` from configuration text."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                       inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc)) from None
    raw = dict(parser[_SECTION])
    unknown = sorted(set(raw) - set(KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for key in ("K", "N"):
        if key not in raw:
            raise ConfigError(key, "missing required key")

    K = _int("K", raw["K"])
    N = _int("N", raw["N"])
    if K < 1:
        raise ConfigError("K", "must be positive")
    M_k = _per_user("M_k", _floats("M_k", raw.get("M_k", "2")), K, int)
    offset = _floats("paired_offset", raw.get("paired_offset", "0.5"))[0]

    dist = _floats("distances", raw.get("distances", "50, 250"))
    if len(dist) == K:
        distances = tuple(dist)
    elif len(dist) == 2:
        distances, _ = paired_geometry(K, dist[0], dist[1], offset)
    else:
        raise ConfigError("distances", f"expected 2 or {K} values")

    n_near = (K + 1) // 2
    if "azimuths" in raw:
        az = _floats("azimuths", raw["azimuths"])
        if len(az) == K:
            azimuths = tuple(az)
        elif len(az) == n_near:
            azimuths = tuple(az) + tuple(az[j] + offset for j in range(K - n_near))
        else:
            raise ConfigError("azimuths", f"expected {n_near} or {K} values")
    else:
        _, azimuths = paired_geometry(K, offset=offset)

    alpha = raw.get("alpha_policy", "paper_default").strip()
    if alpha != "paper_default":
        alpha = _per_user("alpha_policy", _floats("alpha_policy", alpha), K)
    reg = raw.get("reg_matrix_policy", "successive_J").strip()
    if reg not in ("successive_J", "identity"):
        reg = tuple(_floats("reg_matrix_policy", reg))

    dup = None
    if "duplicate_users" in raw:
        pair = [_int("duplicate_users", v.strip()) for v in raw["duplicate_users"].split(",")]
        if len(pair) != 2:
            raise ConfigError("duplicate_users", "expected two user indices")
        dup = (pair[0] - 1, pair[1] - 1)

    def scalar(key, default):
        vals = _floats(key, raw.get(key, str(default)))
        if len(vals) != 1:
            raise ConfigError(key, "expected a single value")
        return vals[0]

    return Scenario(
        K=K, N=N, M_k=M_k, distances=distances, azimuths=azimuths,
        P_T_dbm=tuple(_floats("P_T_dbm", raw.get("P_T_dbm", "30"))),
        sigma2_dbm=scalar("sigma2_dbm", -35.0),
        angular_spread=scalar("angular_spread", 0.5),
        paired_offset=offset,
        n_paths=_int("n_paths", raw.get("n_paths", "10")),
        diffuse_power=scalar("diffuse_power", 1e-4),
        stack_weighting=raw.get("stack_weighting", "path_loss").strip(),
        mu2_k=_per_user("mu2_k", _floats("mu2_k", raw.get("mu2_k", "1e-2")), K),
        alpha_policy=alpha, reg_matrix_policy=reg,
        seed=_int("seed", raw.get("seed", "0")),
        n_trials=_int("n_trials", raw.get("n_trials", "200")),
        duplicate_users=dup,
    )


def load_scenario(path) -> Scenario:
    """Read and parse a scenario file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from None
    return parse_scenario(text)
