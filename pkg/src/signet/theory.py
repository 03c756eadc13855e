"""Closed-form quantities for the two-cluster signed block model.

Everything here concerns ``k = 2`` equal clusters of size ``n/2`` with edge
probability ``p`` and sign-flip probability ``eta``. Besides the formulas
themselves the module builds the expected matrices explicitly, so every
closed form can be checked against a dense eigendecomposition.

Logs are natural logarithms throughout.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import mpmath
import numpy as np

from .errors import (
    ConditionViolated,
    HypothesisViolated,
    InvalidParams,
    OddN,
    PTooSmallForChernoff,
)


class TauMode(enum.Enum):
    BOTTOM_TWO = "BottomTwo"  # {1, w} are the two smallest eigenvectors of T-bar
    BOTTOM_ONE = "BottomOne"  # w alone is the smallest


@dataclass(frozen=True)
class EigenGroup:
    value: float
    multiplicity: int
    vector: str | None = None  # "ones" or "w" when the group is a known single vector


@dataclass(frozen=True)
class ExpectedSpectra:
    n: int
    p: float
    eta: float
    d_plus: float
    d_minus: float
    lam_Lplus: tuple[EigenGroup, ...]
    lam_Lminus: tuple[EigenGroup, ...]


@dataclass(frozen=True)
class TbarSpectrum:
    lambda1: float  # constant vector
    lambda2: float  # w
    lambda3: float  # bulk
    multiplicity3: int
    lambda1_below_bulk: bool
    lambda2_below_bulk: bool


@dataclass(frozen=True)
class TauWindow:
    upper_k2: float
    lower_k1: float


@dataclass(frozen=True)
class ConcentrationBudget:
    n: int
    p: float
    eps_conc: float
    tau_plus: float
    tau_minus: float
    delta_A: float
    delta_D: float
    delta_AD_plus: float
    delta_AD_minus: float
    c_tilde: float
    chernoff_threshold: float
    chernoff_applicable: bool


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta < 0.5:
        raise InvalidParams(f"eta must lie in [0, 1/2), got {eta}")


def _check_even(n: int) -> None:
    if n < 2 or n % 2:
        raise OddN(f"two equal clusters need an even n >= 2, got {n}")


def _check_taus(tau_plus: float, tau_minus: float) -> None:
    if not (tau_plus > 0 and tau_minus > 0):
        raise InvalidParams(f"tau+ and tau- must be positive, got {tau_plus}, {tau_minus}")


def informative_vector(n: int) -> np.ndarray:
    """``(1, ..., 1, -1, ..., -1) / sqrt(n)``."""
    _check_even(n)
    w = np.ones(n)
    w[n // 2:] = -1.0
    return w / math.sqrt(n)


def constant_vector(n: int) -> np.ndarray:
    return np.full(n, 1.0 / math.sqrt(n))


# explicit expected matrices ---------------------------------------------

def expected_matrices(n: int, p: float, eta: float) -> dict[str, np.ndarray]:
    """Dense E[A+], E[A-], E[D+], E[D-], E[L+], E[L-], E[A], E[D-bar], E[L-bar]."""
    _check_even(n)
    _check_eta(eta)
    half = n // 2
    same = np.zeros((n, n), dtype=bool)
    same[:half, :half] = True
    same[half:, half:] = True
    a_plus = np.where(same, p * (1 - eta), p * eta)
    a_minus = np.where(same, p * eta, p * (1 - eta))
    np.fill_diagonal(a_plus, 0.0)
    np.fill_diagonal(a_minus, 0.0)
    d_plus = np.diag(a_plus.sum(axis=1))
    d_minus = np.diag(a_minus.sum(axis=1))
    a = a_plus - a_minus
    d_bar = d_plus + d_minus
    return {
        "A_plus": a_plus, "A_minus": a_minus,
        "D_plus": d_plus, "D_minus": d_minus,
        "L_plus": d_plus - a_plus, "L_minus": d_minus - a_minus,
        "A": a, "D_bar": d_bar, "L_bar": d_bar - a,
    }


def expected_sponge_pencil(n: int, p: float, eta: float, tau_plus: float, tau_minus: float):
    """``(Q-bar, P-bar) = (E L+ + tau- E D-, E L- + tau+ E D+)``."""
    m = expected_matrices(n, p, eta)
    return m["L_plus"] + tau_minus * m["D_minus"], m["L_minus"] + tau_plus * m["D_plus"]


def tbar_matrix(n: int, p: float, eta: float, tau_plus: float, tau_minus: float) -> np.ndarray:
    """``P-bar^{-1/2} Q-bar P-bar^{-1/2}`` built densely."""
    q, pm = expected_sponge_pencil(n, p, eta, tau_plus, tau_minus)
    w, u = np.linalg.eigh(pm)
    s = (u / np.sqrt(w)) @ u.T
    t = s @ q @ s
    return 0.5 * (t + t.T)


# closed forms ------------------------------------------------------------

def expected_spectra(n: int, p: float, eta: float) -> ExpectedSpectra:
    _check_even(n)
    _check_eta(eta)
    if not 0.0 < p <= 1.0:
        raise InvalidParams(f"p must lie in (0, 1], got {p}")
    bulk = EigenGroup(n * p / 2, n - 2)
    return ExpectedSpectra(
        n=n, p=p, eta=eta,
        d_plus=p * (n / 2 - 1 + eta),
        d_minus=p * (n / 2 - eta),
        lam_Lplus=(EigenGroup(0.0, 1, "ones"), EigenGroup(p * n * eta, 1, "w"), bulk),
        lam_Lminus=(EigenGroup(0.0, 1, "ones"), EigenGroup(p * n * (1 - eta), 1, "w"), bulk),
    )


def tbar_spectrum(n: int, eta: float, tau_plus: float, tau_minus: float) -> TbarSpectrum:
    _check_eta(eta)
    _check_taus(tau_plus, tau_minus)
    a = n / 2 - eta
    b = n / 2 - 1 + eta
    l1 = tau_minus * a / (tau_plus * b)
    l2 = (n * eta + tau_minus * a) / (n * (1 - eta) + tau_plus * b)
    l3 = (n + 2 * tau_minus * a) / (n + 2 * tau_plus * b)
    return TbarSpectrum(l1, l2, l3, n - 2, l1 < l3, l2 < l3)


def tau_window(n: int, eta: float, tau_plus: float) -> TauWindow:
    _check_eta(eta)
    ratio = (n / 2 - 1 + eta) / (n / 2 - eta)
    return TauWindow(upper_k2=tau_plus * ratio, lower_k1=tau_plus * eta / (1 - eta) * ratio)


def tau_admissible(n: int, eta: float, tau_plus: float, tau_minus: float,
                   mode: TauMode | str) -> bool:
    """Strict τ condition for ``mode``: the informative vectors sit below the bulk."""
    mode = TauMode(mode)
    _check_taus(tau_plus, tau_minus)
    win = tau_window(n, eta, tau_plus)
    if mode is TauMode.BOTTOM_TWO:
        return tau_minus < win.upper_k2
    return tau_minus > win.lower_k1


def exact_gap(n: int, eta: float, tau_plus: float, tau_minus: float, mode: TauMode | str) -> float:
    """Distance from the informative eigenvalue(s) of T-bar to the rest of its spectrum."""
    mode = TauMode(mode)
    s = tbar_spectrum(n, eta, tau_plus, tau_minus)
    if mode is TauMode.BOTTOM_TWO:
        return min(s.lambda3 - s.lambda1, s.lambda3 - s.lambda2)
    return min(s.lambda1, s.lambda3) - s.lambda2


def spectral_gap_lower_bound(n: int, eta: float, tau_plus: float, tau_minus: float,
                             eps_tau: float, mode: TauMode | str) -> float:
    mode = TauMode(mode)
    _check_eta(eta)
    _check_taus(tau_plus, tau_minus)
    if n < 6:
        raise ConditionViolated(f"the gap bound needs n >= 6, got {n}")
    if not 0.0 < eps_tau < 1.0:
        raise ConditionViolated(f"eps_tau must lie in (0, 1), got {eps_tau}")
    ratio = (n / 2 - 1 + eta) / (n / 2 - eta)
    second = (1 - 2 * eta) / 3 * (3 + tau_plus + tau_minus) / (1 + tau_plus) ** 2
    if mode is TauMode.BOTTOM_TWO:
        limit = eps_tau * tau_plus * ratio
        if tau_minus > limit:
            raise ConditionViolated(f"tau- = {tau_minus} exceeds eps_tau * window = {limit}")
        first = 2 * (1 - eps_tau) / (3 * (1 + tau_plus))
    else:
        limit = eta / (1 - eta) * ratio * tau_plus / eps_tau
        if tau_minus < limit:
            raise ConditionViolated(f"tau- = {tau_minus} is below window / eps_tau = {limit}")
        first = eta * (1 / eps_tau - 1) / (1 - eta + tau_plus)
    return min(first, second)


def chernoff_threshold(n: int, eta: float = 0.0) -> float:
    """Smallest p for which the degree concentration holds for both D+ and D-."""
    return 6 * math.log(n) / min(n / 2 - 1 + eta, n / 2 - eta)


def c_tilde(eps_conc: float) -> float:
    return (1 + eps_conc) * 2 * math.sqrt(2) + 1 + math.sqrt(3)


def concentration_budget(n: int, p: float, eps_conc: float, tau_plus: float = 1.0,
                         tau_minus: float = 1.0, eta: float = 0.0,
                         strict: bool = False) -> ConcentrationBudget:
    """Deviation radii for the adjacency and degree matrices.

    The degree radius rests on a Chernoff argument that needs ``p`` above
    :func:`chernoff_threshold`; below it the radii are still returned with
    ``chernoff_applicable=False`` unless ``strict`` is set.
    """
    if not p > 0:
        raise PTooSmallForChernoff(f"p must be positive, got {p}")
    if not 0.0 < eps_conc <= 0.5:
        raise InvalidParams(f"eps_conc must lie in (0, 1/2], got {eps_conc}")
    _check_taus(tau_plus, tau_minus)
    thr = chernoff_threshold(n, eta)
    ok = p > thr
    if strict and not ok:
        raise PTooSmallForChernoff(f"p = {p} <= 6 log n / (n/2 - 1 + eta) = {thr:.6g}")
    delta_a = ((1 + eps_conc) * 2 * math.sqrt(2) + 1) * math.sqrt(n * p)
    delta_d = math.sqrt(3 * p * n * math.log(n))
    return ConcentrationBudget(
        n=n, p=p, eps_conc=eps_conc, tau_plus=tau_plus, tau_minus=tau_minus,
        delta_A=delta_a, delta_D=delta_d,
        delta_AD_plus=delta_a + delta_d * (1 + tau_plus),
        delta_AD_minus=delta_a + delta_d * (1 + tau_minus),
        c_tilde=c_tilde(eps_conc), chernoff_threshold=thr, chernoff_applicable=ok,
    )


def perturbation_hypotheses(budget: ConcentrationBudget, n: int, p: float, eta: float,
                            tau_plus: float, tau_minus: float) -> list[dict]:
    """Both radius conditions with their two sides; ``holds`` marks each one."""
    dp = budget.delta_A + budget.delta_D * (1 + tau_plus)
    dm = budget.delta_A + budget.delta_D * (1 + tau_minus)
    rp = tau_plus * p / 2 * (n / 2 - 1 + eta)
    rm = tau_minus * p / 2 * (n / 2 - eta)
    return [
        {"name": "delta_AD_plus", "value": dp, "threshold": rp, "holds": dp <= rp},
        {"name": "delta_AD_minus", "value": dm, "threshold": rm, "holds": dm <= rm},
    ]


def _five_terms(dp: float, dm: float, n: int, p: float, eta: float,
                tau_plus: float, tau_minus: float) -> float:
    x = tau_plus * p * (n / 2 - 1 + eta)
    qbar = n * p / 2 + tau_minus * p * (n / 2 - eta)
    r2 = 2 * math.sqrt(2)
    return (r2 * math.sqrt(dp) * qbar / x ** 1.5
            + dm / x
            + r2 * dm * math.sqrt(dp) / x ** 1.5
            + 2 * dp * dm / x ** 2
            + 2 * dp * qbar / x ** 2)


def perturbation_bound(budget: ConcentrationBudget, n: int, p: float, eta: float,
                       tau_plus: float, tau_minus: float) -> float:
    """Upper bound on ``||T - T-bar||_2`` once both radius conditions hold."""
    _check_eta(eta)
    _check_taus(tau_plus, tau_minus)
    hyp = perturbation_hypotheses(budget, n, p, eta, tau_plus, tau_minus)
    bad = [h for h in hyp if not h["holds"]]
    if bad:
        msg = "; ".join(f"{h['name']} = {h['value']:.6g} > {h['threshold']:.6g}" for h in bad)
        raise HypothesisViolated(msg, failures=bad)
    return _five_terms(hyp[0]["value"], hyp[1]["value"], n, p, eta, tau_plus, tau_minus)


def perturbation_bound_norms(budget: ConcentrationBudget, n: int, p: float, eta: float,
                             tau_plus: float, tau_minus: float, dps: int = 50) -> float:
    """Same bound assembled from the operator-norm factors, in extended precision.

    ``||P^{-1/2} - P-bar^{-1/2}||``, ``||P-bar^{-1/2}||``, ``||Q - Q-bar||`` and
    ``||Q-bar||`` are built separately (the last two from the expected
    spectra) and combined through the submultiplicative expansion of
    ``(P-bar^{-1/2} + E_P)(Q-bar + E_Q)(P-bar^{-1/2} + E_P) - T-bar``.
    """
    hyp = perturbation_hypotheses(budget, n, p, eta, tau_plus, tau_minus)
    bad = [h for h in hyp if not h["holds"]]
    if bad:
        raise HypothesisViolated("radius conditions fail", failures=bad)
    sp_ = expected_spectra(n, p, eta)
    with mpmath.workdps(dps):
        mp = mpmath.mpf
        dp = mp(budget.delta_A) + mp(budget.delta_D) * (1 + mp(tau_plus))
        dm = mp(budget.delta_A) + mp(budget.delta_D) * (1 + mp(tau_minus))
        pbar_min = min(mp(g.value) + mp(tau_plus) * mp(p) * (mp(n) / 2 - 1 + mp(eta))
                       for g in sp_.lam_Lminus if g.multiplicity)
        qbar = max(mp(g.value) + mp(tau_minus) * mp(p) * (mp(n) / 2 - mp(eta))
                   for g in sp_.lam_Lplus if g.multiplicity)
        p_inv_half = 1 / mpmath.sqrt(pbar_min)
        e_p = mpmath.sqrt(2) * mpmath.sqrt(dp) / pbar_min
        e_q = dm
        total = (2 * e_p * qbar * p_inv_half + p_inv_half ** 2 * e_q
                 + 2 * p_inv_half * e_p * e_q + e_p ** 2 * e_q + e_p ** 2 * qbar)
        return float(total)


def cbar(eps_conc: float, tau_plus: float, tau_minus: float) -> float:
    """Coefficient of ``(log n / (n p))^{1/4}`` in the simplified perturbation bound."""
    c = c_tilde(eps_conc)
    return (3 ** 1.5 * math.sqrt(2) * math.sqrt(c) * (1 + tau_minus) / tau_plus ** 1.5
            + 3 * c / tau_plus
            + 6 ** 1.5 * c ** 1.5 / tau_plus ** 1.5
            + 18 * c ** 2 / tau_plus ** 2
            + 9 * c * (1 + tau_minus) / tau_plus ** 2)


def success_probability(n: int, p: float, c_eps: float) -> float:
    """``1 - 4/n - 2n exp(-pn / c_eps)`` for a caller-supplied constant ``c_eps``.

    The constant is not known numerically; this only evaluates the
    expression for a value the caller chooses.
    """
    if not c_eps > 0:
        raise InvalidParams("c_eps must be positive")
    return 1 - 4 / n - 2 * n * math.exp(-p * n / c_eps)


def signed_laplacian_expected_spectrum(n: int, p: float, eta: float):
    """``(lambda_min, lambda_bulk, v_min)`` of E[D-bar - A]; the bulk has multiplicity n-1."""
    _check_even(n)
    _check_eta(eta)
    return 2 * eta * (n - 1) * p, (n - 2 * eta) * p, informative_vector(n)


def min_p_threshold_thm3(n: int, eta: float, eps_conc: float, eps_acc: float) -> float:
    """Edge density above which the signed Laplacian's bottom eigenvector tracks w."""
    _check_eta(eta)
    if not 0.0 < eps_acc < 1.0:
        raise InvalidParams(f"eps_acc must lie in (0, 1), got {eps_acc}")
    if not 0.0 < eps_conc <= 0.5:
        raise InvalidParams(f"eps_conc must lie in (0, 1/2], got {eps_conc}")
    c = (1 + eps_conc) * 2 * math.sqrt(2) + 1
    return 4 * c ** 2 / (eps_acc ** 2 * (1 - 2 * eta) ** 2) * math.log(n) / n


def weyl_interval(lambda_bar: float, w_norm: float) -> tuple[float, float]:
    if w_norm < 0:
        raise InvalidParams("perturbation norm must be non-negative")
    return lambda_bar - w_norm, lambda_bar + w_norm


def chernoff_tail(mu: float, delta: float) -> float:
    """``2 exp(-mu delta^2 / 3)``: two-sided tail for a Bernoulli sum with mean ``mu``."""
    if not mu > 0:
        raise InvalidParams("mu must be positive")
    if not 0.0 <= delta < 1.0:
        raise InvalidParams("delta must lie in [0, 1)")
    return 2 * math.exp(-mu * delta ** 2 / 3)


# reports for the command line -------------------------------------------

CHECKS = ("spectra", "tbar", "tau", "gap", "pert", "lbar")


def report(check: str, n: int, p: float = 0.1, eta: float = 0.1, tau_plus: float = 1.0,
           tau_minus: float = 1.0, eps_tau: float = 0.5, eps_conc: float = 0.5,
           eps_acc: float = 0.5) -> dict:
    """JSON-ready record of one family of closed-form quantities."""
    if check not in CHECKS:
        raise InvalidParams(f"unknown check {check!r}; choose from {', '.join(CHECKS)}")
    out: dict = {"check": check, "n": n, "p": p, "eta": eta,
                 "tau_plus": tau_plus, "tau_minus": tau_minus}
    if check == "spectra":
        s = expected_spectra(n, p, eta)
        out.update(d_plus=s.d_plus, d_minus=s.d_minus,
                   lam_Lplus=[asdict(g) for g in s.lam_Lplus],
                   lam_Lminus=[asdict(g) for g in s.lam_Lminus])
    elif check == "tbar":
        out.update(asdict(tbar_spectrum(n, eta, tau_plus, tau_minus)))
    elif check == "tau":
        win = tau_window(n, eta, tau_plus)
        out.update(asdict(win),
                   bottom_two=tau_admissible(n, eta, tau_plus, tau_minus, TauMode.BOTTOM_TWO),
                   bottom_one=tau_admissible(n, eta, tau_plus, tau_minus, TauMode.BOTTOM_ONE))
    elif check == "gap":
        out["eps_tau"] = eps_tau
        for mode in TauMode:
            entry: dict = {"exact_gap": exact_gap(n, eta, tau_plus, tau_minus, mode)}
            try:
                entry["lower_bound"] = spectral_gap_lower_bound(n, eta, tau_plus, tau_minus,
                                                                eps_tau, mode)
                entry["condition_holds"] = True
            except ConditionViolated as exc:
                entry.update(lower_bound=None, condition_holds=False, reason=str(exc))
            out[mode.value] = entry
    elif check == "pert":
        b = concentration_budget(n, p, eps_conc, tau_plus, tau_minus, eta=eta)
        hyp = perturbation_hypotheses(b, n, p, eta, tau_plus, tau_minus)
        out.update(eps_conc=eps_conc, delta_A=b.delta_A, delta_D=b.delta_D,
                   delta_AD_plus=b.delta_AD_plus, delta_AD_minus=b.delta_AD_minus,
                   c_tilde=b.c_tilde, cbar=cbar(eps_conc, tau_plus, tau_minus),
                   chernoff_threshold=b.chernoff_threshold,
                   chernoff_applicable=b.chernoff_applicable, hypotheses=hyp)
        try:
            bound = perturbation_bound(b, n, p, eta, tau_plus, tau_minus)
            alt = perturbation_bound_norms(b, n, p, eta, tau_plus, tau_minus)
            out.update(status="ok", bound=bound, bound_norm_form=alt,
                       relative_difference=abs(bound - alt) / abs(alt) if alt else 0.0)
        except HypothesisViolated as exc:
            out.update(status="HypothesisViolated", message=str(exc), bound=None)
    else:
        lam_min, bulk, _ = signed_laplacian_expected_spectrum(n, p, eta)
        thr = min_p_threshold_thm3(n, eta, eps_conc, eps_acc)
        out.update(lambda_min=lam_min, lambda_bulk=bulk, bulk_multiplicity=n - 1,
                   eps_conc=eps_conc, eps_acc=eps_acc, p_threshold=thr,
                   threshold_vacuous=thr > 1.0, p_above_threshold=p >= thr)
    return out
