"""Non-resonance margins and measure estimation on the aspect-ratio line.

For a finite set of tangential modes S, the tangential frequency vector
omega(gamma) = (Omega_n(gamma))_{n in S} must avoid resonances with itself
and with the normal-mode frequencies. Five inequality families are
checked, each with its own weight; all are normalized so that a state
"gamma is excluded at constant upsilon" reads "margin < upsilon":

    zeroth      |omega.l|                 / (8 <l>^-tau)
    transport   |omega.l + m*j|           / (8 <j> <l>^-tau)
    first       |omega.l + Omega_n|       / (4 n <l>^-tau)
    difference  |omega.l + Omega_n - Omega_n'| / (4 <n-n'> <l>^-tau)
    sum         |omega.l + Omega_n + Omega_n'| / (4 (n+n') <l>^-tau)

over l in the box |l|_inf <= l_max and normal modes n, n' <= n_max (modes
in S and the hyperbolic band 2..n_bar are excluded; (l,n,n') = (0,n,n) is
excluded from the difference family). The measure estimator marks each
grid gamma excluded when any margin drops below upsilon and reports the
trend over a decreasing sequence of upsilon values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .spectral import critical_gamma, kappa

FAMILIES = ("zeroth", "transport", "first", "difference", "sum")

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ResonanceConfig:
    """Configuration of the resonance analysis.

    ``shift`` adds a constant to the rotation rate entering every
    frequency (a crude model of the perturbed spectra n*m - 1/2 + r);
    zero means the exact linear frequencies.
    """

    sites: tuple[int, ...]
    n_bar: int = 2
    upsilons: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    tau: float = 3.0
    l_max: int = 20
    n_max: int = 64
    gamma_min: float = 1.5
    gamma_max: float = 2.5
    delta_gamma: float = 1e-4
    shift: float = 0.0
    index_restrictions: bool = False

    def __post_init__(self) -> None:
        sites = tuple(sorted(set(int(s) for s in self.sites)))
        object.__setattr__(self, "sites", sites)
        if not sites:
            raise DomainError("at least one tangential site is required")
        if self.n_bar < 2:
            raise DomainError("hyperbolic threshold n_bar must be >= 2")
        if sites[0] <= self.n_bar:
            raise DomainError("all tangential sites must exceed n_bar")
        if sites[-1] > self.n_max:
            raise DomainError("n_max must cover the tangential sites")
        if self.tau < 1.0:
            raise DomainError("Diophantine exponent tau must be >= 1")
        if self.l_max < 1 or self.n_max < 1:
            raise DomainError("index cutoffs must be positive")
        if any(u <= 0 for u in self.upsilons):
            raise DomainError("Diophantine constants must be positive")
        if not (self.gamma_min <= self.gamma_max):
            raise DomainError("empty aspect-ratio interval")
        if self.delta_gamma <= 0:
            raise DomainError("gamma grid step must be positive")
        lo = 1.0 if self.n_bar == 2 else critical_gamma(self.n_bar)
        hi = critical_gamma(self.n_bar + 1)
        if not (lo < self.gamma_min and self.gamma_max < hi):
            raise DomainError(
                "aspect-ratio interval must lie inside the stability window "
                f"({lo:.6f}, {hi:.6f}) for n_bar = {self.n_bar}"
            )

    @property
    def normal_modes(self) -> tuple[int, ...]:
        banned = set(self.sites) | set(range(2, self.n_bar + 1))
        return tuple(n for n in range(1, self.n_max + 1) if n not in banned)

    def gamma_grid(self) -> np.ndarray:
        count = int(round((self.gamma_max - self.gamma_min) / self.delta_gamma)) + 1
        return self.gamma_min + self.delta_gamma * np.arange(count)


def _mode_frequencies(gamma: float, modes, shift: float) -> np.ndarray:
    """|mu_plus * mu_minus|^(1/2) with the rotation rate shifted by ``shift``."""
    rot = gamma / (1.0 + gamma) ** 2 + shift
    out = np.empty(len(modes))
    for i, n in enumerate(modes):
        half_kappa = 0.5 * kappa(int(n), gamma)
        base = n * rot - 0.5
        out[i] = math.sqrt(abs((base + half_kappa) * (base - half_kappa)))
    return out


@lru_cache(maxsize=8)
def _lattice(n_sites: int, l_max: int, tau: float):
    """Integer box |l|_inf <= l_max with sup-norm sizes and tau powers."""
    ranges = [np.arange(-l_max, l_max + 1)] * n_sites
    mesh = np.meshgrid(*ranges, indexing="ij")
    lattice = np.stack([m.ravel() for m in mesh], axis=1)
    lnorm = np.maximum(np.abs(lattice).max(axis=1), 1)
    return lattice, lnorm.astype(float), lnorm.astype(float) ** tau


@lru_cache(maxsize=8)
def _pair_groups(modes: tuple[int, ...]):
    """Unordered mode pairs grouped by |n - n'| and by n + n'."""
    arr = np.array(modes)
    i, j = np.triu_indices(len(arr), k=1)
    diffs = arr[j] - arr[i]
    diff_groups = []
    for d in np.unique(diffs):
        sel = diffs == d
        diff_groups.append((int(d), j[sel], i[sel]))
    i2, j2 = np.triu_indices(len(arr), k=0)
    sums = arr[i2] + arr[j2]
    sum_groups = []
    for s in np.unique(sums):
        sel = sums == s
        sum_groups.append((int(s), i2[sel], j2[sel]))
    return diff_groups, sum_groups


def _group_min(a_vals: np.ndarray, v_group: np.ndarray):
    """For each a in a_vals, min_j |a + v_j| and the attaining j."""
    order = np.argsort(v_group)
    vs = v_group[order]
    pos = np.searchsorted(vs, -a_vals)
    lo = np.clip(pos - 1, 0, len(vs) - 1)
    hi = np.clip(pos, 0, len(vs) - 1)
    d_lo = np.abs(a_vals + vs[lo])
    d_hi = np.abs(a_vals + vs[hi])
    take_hi = d_hi < d_lo
    best = np.where(take_hi, d_hi, d_lo)
    best_idx = order[np.where(take_hi, hi, lo)]
    return best, best_idx


@dataclass(frozen=True)
class FamilyMargin:
    family: str
    margin: float
    index: tuple


def _restriction_floor(cfg: ResonanceConfig) -> float:
    """Safe per-<l> cutoff constant; see ``index_restrictions``.

    A combo with |j|, n, |n-n'| or n+n' above C*<l> has normalized margin
    at least (w_min - w_vec/C)/weight_scale; C is chosen so that floor
    exceeds max(upsilons), keeping exclusion decisions identical.
    """
    g1, g2 = cfg.gamma_min, cfg.gamma_max
    rot_min = min(g / (1.0 + g) ** 2 for g in (g1, g2)) + cfg.shift
    w_max = 0.0
    for g in (g1, g2):
        w_max = max(w_max, float(np.abs(_mode_frequencies(g, cfg.sites, cfg.shift)).sum()))
    u_cap = max(cfg.upsilons)
    denom = rot_min - 8.0 * u_cap
    if denom <= 0:
        return math.inf  # restrictions unusable; caller falls back to full sets
    return (w_max + 1.0) / denom


def _family_margins(gamma: float, cfg: ResonanceConfig, want_index: bool):
    """Normalized minimal margins of the five families at one gamma."""
    lattice, lnorm, lpow = _lattice(len(cfg.sites), cfg.l_max, cfg.tau)
    omega = _mode_frequencies(gamma, cfg.sites, cfg.shift)
    normal = cfg.normal_modes
    omega_normal = _mode_frequencies(gamma, normal, cfg.shift)
    rot = gamma / (1.0 + gamma) ** 2 + cfg.shift
    a_vals = lattice @ omega
    nonzero = np.abs(lattice).max(axis=1) > 0

    restrict = None
    if cfg.index_restrictions:
        c = _restriction_floor(cfg)
        if math.isfinite(c):
            restrict = c

    def l_tuple(k: int) -> tuple:
        return tuple(int(x) for x in lattice[k])

    margins: dict[str, FamilyMargin] = {}

    # zeroth: |omega.l| <l>^tau / 8, l != 0
    vals = np.abs(a_vals) * lpow / 8.0
    vals = np.where(nonzero, vals, np.inf)
    k = int(np.argmin(vals))
    margins["zeroth"] = FamilyMargin(
        "zeroth", float(vals[k]), (l_tuple(k),) if want_index else ()
    )

    # transport: |omega.l + rot*j| <l>^tau / (8<j>), (l, j) != (0, 0)
    j_vals = np.arange(-cfg.n_max, cfg.n_max + 1)
    jw = np.maximum(np.abs(j_vals), 1).astype(float)
    mat = np.abs(a_vals[:, None] + rot * j_vals[None, :])
    mat *= lpow[:, None]
    mat /= 8.0 * jw[None, :]
    mat[~nonzero, j_vals.searchsorted(0)] = np.inf
    if restrict is not None:
        mat[np.abs(j_vals)[None, :] > restrict * lnorm[:, None]] = np.inf
    k = int(np.argmin(mat))
    ki, kj = divmod(k, mat.shape[1])
    margins["transport"] = FamilyMargin(
        "transport",
        float(mat[ki, kj]),
        (l_tuple(ki), int(j_vals[kj])) if want_index else (),
    )

    # first: |omega.l + Omega_n| <l>^tau / (4n)
    n_arr = np.array(normal, dtype=float)
    mat = np.abs(a_vals[:, None] + omega_normal[None, :])
    mat *= lpow[:, None]
    mat /= 4.0 * n_arr[None, :]
    if restrict is not None:
        mat[n_arr[None, :] > restrict * lnorm[:, None]] = np.inf
    k = int(np.argmin(mat))
    ki, kj = divmod(k, mat.shape[1])
    margins["first"] = FamilyMargin(
        "first",
        float(mat[ki, kj]),
        (l_tuple(ki), int(normal[kj])) if want_index else (),
    )

    # pair families, grouped by weight so each group reduces to a nearest-
    # neighbour search in the sorted group values
    diff_groups, sum_groups = _pair_groups(normal)

    n_idx = np.array(normal)

    def scan(groups, sign: float):
        best = (math.inf, None)
        for gval, idx1, idx2 in groups:
            v = omega_normal[idx1] + sign * omega_normal[idx2]
            dmin, which = _group_min(a_vals, v)
            m = dmin * lpow / (4.0 * gval)
            if restrict is not None:
                m = np.where(gval > restrict * lnorm, np.inf, m)
            k = int(np.argmin(m))
            if m[k] < best[0]:
                pair = (int(n_idx[idx1[which[k]]]), int(n_idx[idx2[which[k]]]))
                best = (float(m[k]), (l_tuple(k),) + pair)
        return best

    best_d = scan(diff_groups, -1.0)
    # the triple (l, n, n') = (0, n, n) is excluded; equal modes enter only
    # with l != 0, where the margin is |omega.l| <l>^tau / 4
    vals = np.where(nonzero, np.abs(a_vals) * lpow / 4.0, np.inf)
    k0 = int(np.argmin(vals))
    if vals[k0] < best_d[0]:
        best_d = (float(vals[k0]), (l_tuple(k0), normal[0], normal[0]))
    margins["difference"] = FamilyMargin(
        "difference", best_d[0], best_d[1] if want_index else ()
    )

    best_s = scan(sum_groups, +1.0)
    margins["sum"] = FamilyMargin("sum", best_s[0], best_s[1] if want_index else ())
    return margins


def melnikov_margins(gamma: float, cfg: ResonanceConfig) -> dict[str, FamilyMargin]:
    """Minimal normalized margin and attaining index of each family."""
    return _family_margins(gamma, cfg, want_index=True)


def margins_vector(gamma: float, cfg: ResonanceConfig) -> np.ndarray:
    """Minimal margins of the five families, ordered as FAMILIES."""
    res = _family_margins(gamma, cfg, want_index=False)
    return np.array([res[f].margin for f in FAMILIES])


# --- transversality ------------------------------------------------------

def _richardson_steps(gamma: float, h: float):
    return np.array([gamma, gamma + h, gamma - h, gamma + h / 2, gamma - h / 2])


def _fd_columns(values: np.ndarray, h: float) -> np.ndarray:
    """(f, f', f'') from the 5-point Richardson stencil along axis 0."""
    f0, fp, fm, fp2, fm2 = values
    d1_h = (fp - fm) / (2.0 * h)
    d1_h2 = (fp2 - fm2) / h
    d1 = (4.0 * d1_h2 - d1_h) / 3.0
    d2_h = (fp - 2.0 * f0 + fm) / h**2
    d2_h2 = (fp2 - 2.0 * f0 + fm2) / (h / 2.0) ** 2
    d2 = (4.0 * d2_h2 - d2_h) / 3.0
    return np.stack([f0, d1, d2])


def transversality_margins(
    gamma: float, cfg: ResonanceConfig, k_max: int = 2, h: float = 1e-3
) -> float:
    """min over all index combinations of max_{k<=k_max} |d^k combo| / <l>.

    Derivatives in gamma come from Richardson-extrapolated central
    differences of the closed-form frequencies. The first family is
    extended past n_max with the dominant asymptotic term n*Omega_1 - 1/2,
    which covers the resonance zone of every larger n.
    """
    if not 0 <= k_max <= 2:
        raise DomainError("k_max must be 0, 1 or 2")
    lattice, lnorm, _ = _lattice(len(cfg.sites), cfg.l_max, cfg.tau)
    normal = cfg.normal_modes
    stencil = _richardson_steps(gamma, h)

    omega_st = np.stack([_mode_frequencies(g, cfg.sites, cfg.shift) for g in stencil])
    normal_st = np.stack([_mode_frequencies(g, normal, cfg.shift) for g in stencil])
    rot_st = np.array([g / (1.0 + g) ** 2 + cfg.shift for g in stencil])

    a_st = omega_st @ lattice.T  # (5, M)
    a_fd = _fd_columns(a_st, h)  # (k, M)
    n_fd = _fd_columns(normal_st, h)  # (k, P)
    rot_fd = _fd_columns(rot_st, h)  # (k,)
    kk = k_max + 1

    def reduce_max_min(values_fd):
        # values_fd: (k, X); min over (l, x) of max_k |a_fd + v| / <l>,
        # looping over k to keep temporaries at (M, X)
        m = np.abs(a_fd[0][:, None] + values_fd[0][None, :])
        for k in range(1, kk):
            np.maximum(m, np.abs(a_fd[k][:, None] + values_fd[k][None, :]), out=m)
        m /= lnorm[:, None]
        return float(m.min())

    best = math.inf
    nonzero = np.abs(lattice).max(axis=1) > 0

    # zeroth (l != 0); equal-mode differences with l != 0 reduce to this
    m = np.abs(a_fd[:kk]).max(axis=0) / lnorm
    best = min(best, float(m[nonzero].min()))

    # transport: values rot*j, j != 0 (the (0,0) pair is the l = 0, j = 0
    # corner, already outside the zeroth scan; j = 0 duplicates it)
    j_vals = np.arange(-cfg.n_max, cfg.n_max + 1, dtype=float)
    j_vals = j_vals[j_vals != 0]
    best = min(best, reduce_max_min(rot_fd[:, None] * j_vals[None, :]))

    # first, with the asymptotic extension beyond n_max
    best = min(best, reduce_max_min(n_fd))
    a_max = float(np.abs(a_st[0]).max())
    rot_min = rot_st.min()
    n_ext_hi = max(2 * cfg.n_max, int(math.ceil((a_max + 1.0) / rot_min)) + cfg.n_max)
    n_ext = np.arange(cfg.n_max + 1, n_ext_hi + 1, dtype=float)
    tail_fd = rot_fd[:, None] * n_ext[None, :]
    tail_fd[0] -= 0.5
    best = min(best, reduce_max_min(tail_fd))

    # pair families (exact enumeration over unordered pairs)
    i, j = np.triu_indices(len(normal), k=1)
    best = min(best, reduce_max_min(n_fd[:, i] - n_fd[:, j]))
    i2, j2 = np.triu_indices(len(normal), k=0)
    best = min(best, reduce_max_min(n_fd[:, i2] + n_fd[:, j2]))

    return best


# --- measure estimation ---------------------------------------------------

@dataclass
class ResonanceReport:
    """Grid scan of the non-resonance margins over an aspect-ratio interval."""

    config: ResonanceConfig
    gammas: np.ndarray
    margins: np.ndarray  # (n_gamma, 5) ordered as FAMILIES
    families: tuple[str, ...] = FAMILIES

    def overall_margin(self) -> np.ndarray:
        return self.margins.min(axis=1)

    def excluded_mask(self, upsilon: float) -> np.ndarray:
        return self.overall_margin() < upsilon

    def family_pass(self, upsilon: float) -> np.ndarray:
        """(n_gamma, 5) boolean: margin >= upsilon per family."""
        return self.margins >= upsilon

    def excluded_measure(self, upsilon: float) -> float:
        return float(self.excluded_mask(upsilon).sum()) * self.config.delta_gamma

    def good_measure(self, upsilon: float) -> float:
        return float((~self.excluded_mask(upsilon)).sum()) * self.config.delta_gamma

    def excluded_intervals(self, upsilon: float) -> list[tuple[float, float]]:
        mask = self.excluded_mask(upsilon)
        out = []
        start = None
        for g, m in zip(self.gammas, mask):
            if m and start is None:
                start = g
            elif not m and start is not None:
                out.append((float(start), float(g)))
                start = None
        if start is not None:
            out.append((float(start), float(self.gammas[-1])))
        return out

    def trend(self) -> list[tuple[float, float]]:
        """(upsilon, excluded measure) for the configured upsilon sequence."""
        return [(u, self.excluded_measure(u)) for u in self.config.upsilons]

    def to_csv(self, path, upsilon: float | None = None) -> None:
        """Rows (gamma, family, min margin, pass) at the reference upsilon."""
        u = self.config.upsilons[0] if upsilon is None else upsilon
        lines = ["gamma,family,min_margin,pass"]
        for i, g in enumerate(self.gammas):
            for k, fam in enumerate(self.families):
                m = self.margins[i, k]
                lines.append(
                    f"{format(float(g), '.17g')},{fam},{format(float(m), '.17g')},"
                    f"{int(m >= u)}"
                )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_json(self, path) -> None:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "kind": "resonance-report",
            "sites": list(self.config.sites),
            "n_bar": self.config.n_bar,
            "tau": self.config.tau,
            "l_max": self.config.l_max,
            "n_max": self.config.n_max,
            "gamma_min": self.config.gamma_min,
            "gamma_max": self.config.gamma_max,
            "delta_gamma": self.config.delta_gamma,
            "shift": self.config.shift,
            "n_gamma": int(len(self.gammas)),
            "trend": [
                {
                    "upsilon": u,
                    "excluded_measure": self.excluded_measure(u),
                    "good_measure": self.good_measure(u),
                    "excluded_intervals": self.excluded_intervals(u),
                }
                for u in self.config.upsilons
            ],
            "min_margin_overall": float(self.overall_margin().min()),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")


def _margins_chunk(cfg: ResonanceConfig, gammas: np.ndarray) -> np.ndarray:
    out = np.empty((len(gammas), len(FAMILIES)))
    for i, g in enumerate(gammas):
        out[i] = margins_vector(float(g), cfg)
    return out


def measure_estimate(cfg: ResonanceConfig, workers: int = 1) -> ResonanceReport:
    """Scan the gamma grid and report exclusion measures per upsilon.

    Margins are upsilon-free, so one scan serves the whole upsilon
    sequence. The grid is split into chunks evaluated independently
    (in worker processes when ``workers`` > 1); the merge is
    order-independent, so the report does not depend on scheduling.
    """
    gammas = cfg.gamma_grid()
    if workers <= 1 or len(gammas) < 4 * workers:
        margins = _margins_chunk(cfg, gammas)
    else:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(gammas, 4 * workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_margins_chunk, [cfg] * len(chunks), chunks))
        margins = np.vstack(parts)
    return ResonanceReport(config=cfg, gammas=gammas, margins=margins)
