"""Security sizing and cost prediction for both shuffling protocols.

Three layers, from pessimistic to exact:

  * closed forms: Hoeffding-style bounds on the committee and shuffler
    failure probabilities, as single expressions (sigma for privacy
    against a gamma fraction of corruptions, eta for liveness against an
    alpha dropout rate);
  * exact tails: the same failure events summed from binomial
    distributions, tighter, used by the parameter optimizer;
  * cost models: rounds, bytes, and exponentiations per client.  The
    bayer_groth proof backend is a coarse model for planning; the
    cut_and_choose backend mirrors the simulator's wire format exactly,
    envelope bytes included, and an invariant test holds the two
    accountings equal.

Key-agreement traffic is reported separately as setup cost: the keys and
shares it establishes are reusable across batches, so steady-state
per-batch figures exclude it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

from . import wire
from .accountant import DomainError
from .group import GROUPS
from .ikos import Infeasible

LOG2_E = math.log2(math.e)

ELEMENT_BYTES = wire.ELEMENT_BYTES
CT_BYTES = wire.CT_BYTES
ENVELOPE = wire.ENVELOPE_BYTES

# one share blob on the wire: an encrypted 32-byte scalar plus its tag
SHARE_BLOB_BYTES = 64

PROOF_MODELS = ("bayer_groth", "cut_and_choose")

DEFAULT_BG_FRACTION = 0.10


@dataclass(frozen=True)
class CostParams:
    """One protocol configuration as the cost formulas see it."""

    n: int
    n_dec: int
    m: int
    t: int
    n_shuf: int
    d: int
    gamma: float
    alpha: float
    ell: Optional[int] = None      # alternating only
    h: Optional[int] = None
    w: Optional[int] = None
    n_sc: Optional[int] = None     # shuffle committees; None picks the default
    element_bits: int = 256
    proof_model: str = "bayer_groth"
    sigma_rep: int = 10            # cut_and_choose only
    bg_fraction: float = DEFAULT_BG_FRACTION  # proof bytes per ciphertext byte

    def __post_init__(self):
        if self.n < 1 or self.n_dec < 1 or self.m < 1 or self.n_shuf < 1:
            raise DomainError("counts must be positive")
        if not 1 <= self.t <= self.n_dec:
            raise DomainError(f"need 1 <= t <= n_dec, got t={self.t}")
        if not 0 <= self.d < self.n_shuf:
            raise DomainError(f"need 0 <= d < n_shuf, got d={self.d}")
        if self.m * self.n_dec > self.n:
            raise DomainError("m * n_dec exceeds the client count")
        if not 0 <= self.gamma < 1 or not 0 <= self.alpha < 1:
            raise DomainError("gamma and alpha must lie in [0, 1)")
        if self.proof_model not in PROOF_MODELS:
            raise DomainError(f"unknown proof model {self.proof_model!r}")
        if self.element_bits != 256:
            raise DomainError("byte formulas assume 256-bit elements")
        if (self.h is None) != (self.w is None):
            raise DomainError("grid needs both h and w")
        if self.h is not None and self.h * self.w != self.n:
            raise DomainError("grid h * w must equal n")

    def shuffle_committees(self) -> int:
        if self.n_sc is not None:
            return self.n_sc
        if self.h is None:
            raise DomainError("shuffle committee count needs a grid")
        return min(self.n // self.n_shuf, max(self.h, self.w))


@dataclass(frozen=True)
class CostReport:
    sigma: float
    eta: float
    rounds_best: int
    rounds_worst: int
    bytes_worst_client: int
    bytes_avg_client: int
    exps_per_role: dict
    setup_bytes_worst: int = 0
    setup_bytes_avg: int = 0

    def __post_init__(self):
        if min(self.rounds_best, self.rounds_worst) < 0:
            raise DomainError("rounds must be nonnegative")
        if min(
            self.bytes_worst_client, self.bytes_avg_client,
            self.setup_bytes_worst, self.setup_bytes_avg,
        ) < 0:
            raise DomainError("bytes must be nonnegative")


# -- closed forms -------------------------------------------------------


def _hoeffding_bits(base: float, trials: int) -> float:
    """Bits of failure probability from a one-sided tail at distance
    `base` from the mean, or -inf when the tail bound does not apply."""
    if base < 0:
        return -math.inf
    return 2 * LOG2_E * base * base * trials


def _committee_sigma_bits(p: CostParams) -> float:
    return (
        -math.log2(p.m)
        + _hoeffding_bits(p.t / p.n_dec - p.gamma, p.n_dec)
        - 1
    )


def _committee_eta_bits(p: CostParams) -> float:
    return (
        -math.log2(p.m)
        + _hoeffding_bits((1 - p.alpha) - (p.t + 1) / p.n_dec, p.n_dec)
        - 1
    )


def _shuffler_sigma_bits(p: CostParams) -> float:
    return _hoeffding_bits(1 - p.d / p.n_shuf - p.gamma, p.n_shuf) - 1


def _shuffler_eta_bits(p: CostParams) -> float:
    return _hoeffding_bits((p.d + 1) / p.n_shuf - p.alpha, p.n_shuf) - 1


def _row_shuffles(p: CostParams) -> int:
    """Row-shuffle instances across all iterations of the grid."""
    if p.ell is None or p.h is None:
        raise DomainError("alternating formulas need ell, h, and w")
    count = p.h * ((p.ell + 1) // 2) + p.w * (p.ell // 2)
    if count < 1:
        raise DomainError("no row shuffles: need ell >= 1")
    return count


def sigma_amortized(p: CostParams) -> float:
    """Privacy bits for the chain protocol: the weaker of the committee
    and shuffler bounds."""
    return min(_committee_sigma_bits(p), _shuffler_sigma_bits(p))


def eta_amortized(p: CostParams) -> float:
    """Liveness bits for the chain protocol."""
    return min(_committee_eta_bits(p), _shuffler_eta_bits(p))


def sigma_alternating(p: CostParams) -> float:
    """Privacy bits for the grid protocol; the shuffler branch pays a
    union bound over every row shuffle."""
    extra = math.log2(_row_shuffles(p))
    return min(_committee_sigma_bits(p), _shuffler_sigma_bits(p) - extra)


def eta_alternating(p: CostParams) -> float:
    extra = math.log2(_row_shuffles(p))
    return min(_committee_eta_bits(p), _shuffler_eta_bits(p) - extra)


# -- exact tails --------------------------------------------------------


@lru_cache(maxsize=None)
def binom_tail(n: int, p: float, k: int) -> float:
    """P[Binomial(n, p) >= k]."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    return sum(
        math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(k, n + 1)
    )


def _bits(prob: float) -> float:
    return -math.log2(prob) if prob > 0 else math.inf


def _shuffle_unions(p: CostParams, protocol: str) -> int:
    # the grid protocol reuses fixed committees, so they are the
    # corruptible units; the chain has a single shuffler pool
    return p.shuffle_committees() if protocol == "alternating" else 1


def sigma_exact(p: CostParams, protocol: str = "amortized") -> float:
    """Privacy bits from exact binomial tails: some committee holds t
    reconstructing shares, or some shuffler pool is fully corrupted
    past its allowance."""
    fail = p.m * binom_tail(p.n_dec, p.gamma, p.t) + _shuffle_unions(
        p, protocol
    ) * binom_tail(p.n_shuf, p.gamma, p.n_shuf - p.d)
    return _bits(min(fail, 1.0))


def eta_exact(p: CostParams, protocol: str = "amortized") -> float:
    """Liveness bits from exact binomial tails: some committee drops
    below t live members, or some shuffler pool exceeds its dropout
    allowance."""
    fail = p.m * binom_tail(
        p.n_dec, p.alpha, p.n_dec - p.t + 1
    ) + _shuffle_unions(p, protocol) * binom_tail(p.n_shuf, p.alpha, p.d + 1)
    return _bits(min(fail, 1.0))


# -- rounds -------------------------------------------------------------

# four key-agreement exchanges plus one decryption exchange bracket the
# shuffle phase in both protocols
FRAME_ROUNDS = 5


def _alternating_row_counts(p: CostParams) -> list[int]:
    """Rows shuffled in each iteration (dimensions swap on transpose)."""
    if p.ell is None or p.h is None:
        raise DomainError("alternating rounds need ell, h, and w")
    return [p.h if it % 2 == 0 else p.w for it in range(p.ell)]


def round_model(
    p: CostParams, protocol: str, dropout_case: str = "worst"
) -> int:
    if dropout_case not in ("best", "worst"):
        raise DomainError(f"unknown dropout case {dropout_case!r}")
    chain = p.n_shuf if dropout_case == "worst" else p.n_shuf - p.d
    if protocol == "amortized":
        return FRAME_ROUNDS + chain
    if protocol != "alternating":
        raise DomainError(f"unknown protocol {protocol!r}")
    n_sc = p.shuffle_committees()
    passes = sum(
        math.ceil(rows / n_sc) for rows in _alternating_row_counts(p)
    )
    return FRAME_ROUNDS + passes * chain


# -- byte model, bayer_groth backend ------------------------------------
#
# Coarse planning model: 64-byte ciphertexts, 32-byte scalars and
# elements, a proof costing bg_fraction bytes per ciphertext byte
# shuffled, no envelopes.  One ciphertext per client (16-byte payloads
# embed directly at 256 bits).

BG_INPUT_BYTES = CT_BYTES + ELEMENT_BYTES  # ciphertext + plaintext-knowledge tag


def _bg_dec_member_bytes(k: int) -> int:
    # receive k ciphertexts, return k partial decryptions and one proof
    return k * CT_BYTES + k * ELEMENT_BYTES + 2 * ELEMENT_BYTES


def _act_bytes(list_len: int, bg_fraction: float) -> int:
    """Bytes for one shuffle act: the list in, the list plus proof out."""
    payload = list_len * CT_BYTES
    return round(payload * (2 + bg_fraction))


def _bg_components(p: CostParams, protocol: str) -> dict:
    need = p.n_shuf - p.d
    k_max = math.ceil(p.n / p.m)
    dec_total = p.n_dec * (p.n * CT_BYTES + p.n * ELEMENT_BYTES) + (
        p.n_dec * p.m * 2 * ELEMENT_BYTES
    )
    if protocol == "amortized":
        act_worst = _act_bytes(p.n, p.bg_fraction)
        shuffle_total = need * act_worst
        # acting shufflers sit at the tail of the client range
        overlap = p.n - p.n_shuf < p.m * p.n_dec
    elif protocol == "alternating":
        n_sc = p.shuffle_committees()
        rows = _alternating_row_counts(p)
        lens = [p.w if it % 2 == 0 else p.h for it in range(p.ell)]
        act_worst = sum(
            math.ceil(r / n_sc) * _act_bytes(ln, p.bg_fraction)
            for r, ln in zip(rows, lens)
        )
        shuffle_total = need * sum(
            r * _act_bytes(ln, p.bg_fraction) for r, ln in zip(rows, lens)
        )
        overlap = p.n - n_sc * p.n_shuf < p.m * p.n_dec
    else:
        raise DomainError(f"unknown protocol {protocol!r}")
    member_bytes = BG_INPUT_BYTES + _bg_dec_member_bytes(k_max)
    shuffler_bytes = BG_INPUT_BYTES + act_worst + (
        _bg_dec_member_bytes(k_max) if overlap else 0
    )
    total = (
        p.n * BG_INPUT_BYTES + dec_total + shuffle_total
    )
    return {
        "worst": max(member_bytes, shuffler_bytes),
        "avg": math.ceil(total / p.n),
        "shuffle_total": shuffle_total,
        "dec_total": dec_total,
    }


# -- key agreement (setup) bytes ----------------------------------------
#
# Shared between the planning model and the exact cut_and_choose
# profile; `envelope` adds the transport framing the simulator counts.


def _ka_member_msgs(nd: int, m: int, t: int, i: int) -> dict:
    """Wire sizes of every key-agreement message committee-i members
    exchange, keyed by direction."""
    has_pred = i >= 2
    has_succ = i <= m - 1
    roster_lists = 1 + has_pred + has_succ
    roster = 3 * wire.size_u32() + 3 * (
        wire.size_u32_list(0) + wire.size_element_list(0)
    ) + roster_lists * (36 * nd)
    dealing = (
        wire.size_u32_list(nd - 1)
        + wire.size_raw_list([SHARE_BLOB_BYTES] * (nd - 1))
        + wire.size_element_list(t)
        + wire.size_u32()
    )
    if has_succ:
        dealing += (
            wire.size_u32_list(nd)
            + wire.size_raw_list([SHARE_BLOB_BYTES] * nd)
            + wire.size_element_list(t)
        )
    relay = 0
    for count in (nd - 1, nd if has_pred else 0):
        relay += (
            wire.size_u32_list(count)
            + wire.size_raw_list([SHARE_BLOB_BYTES] * count)
            + wire.size_element_list(count * t)
        )
    faults = wire.size_u32()
    adjudication = (
        wire.size_u32_list(0)
        + wire.size_u32_list(nd)
        + wire.size_u32_list(nd if has_pred else 0)
    )
    offset = wire.size_u32() + (wire.size_scalar() if has_pred else 0)
    return {
        "recv": {"roster": roster, "relay": relay, "adjudication": adjudication},
        "sent": {"dealing": dealing, "faults": faults, "offset": offset},
    }


def _setup_bytes(p: CostParams) -> tuple[int, int]:
    """(worst member, average over all n clients) of key-agreement
    traffic, envelope-free."""
    worst = 0
    total = 0
    for i in range(1, p.m + 1):
        msgs = _ka_member_msgs(p.n_dec, p.m, p.t, i)
        per = sum(msgs["recv"].values()) + sum(msgs["sent"].values())
        worst = max(worst, per)
        total += per * p.n_dec
    return worst, math.ceil(total / p.n)


# -- exponentiation model -----------------------------------------------

BG_PROOF_EXPS_PER_CT = 4.2  # calibrated reconstruction of the proof cost


def exp_counts(p: CostParams, protocol: str = "amortized",
               backend: Optional[str] = None) -> dict:
    """Analytic exponentiation counts per role."""
    backend = backend or p.proof_model
    if backend not in PROOF_MODELS:
        raise DomainError(f"unknown backend {backend!r}")
    k = p.n / p.m
    if backend == "bayer_groth":
        per_ct = 2 + BG_PROOF_EXPS_PER_CT
    else:
        # re-encrypt once, then once per cut-and-choose repetition
        per_ct = 2 * (1 + p.sigma_rep)
    if protocol == "amortized":
        shuffler_cts = p.n
    else:
        n_sc = p.shuffle_committees()
        rows = _alternating_row_counts(p)
        lens = [p.w if it % 2 == 0 else p.h for it in range(p.ell)]
        shuffler_cts = sum(
            math.ceil(r / n_sc) * ln for r, ln in zip(rows, lens)
        )
    return {
        "key_agreement": 2 * (p.t + 1),
        "decryption": 2 * k + 1,
        "shuffler_worst": round(shuffler_cts * per_ct),
        "client_encrypt": 2,
    }


# -- reports and the optimizer ------------------------------------------


def report_for(p: CostParams, protocol: str) -> CostReport:
    comp = _bg_components(p, protocol)
    setup_worst, setup_avg = _setup_bytes(p)
    return CostReport(
        sigma=sigma_exact(p, protocol),
        eta=eta_exact(p, protocol),
        rounds_best=round_model(p, protocol, "best"),
        rounds_worst=round_model(p, protocol, "worst"),
        bytes_worst_client=comp["worst"],
        bytes_avg_client=comp["avg"],
        exps_per_role=exp_counts(p, protocol),
        setup_bytes_worst=setup_worst,
        setup_bytes_avg=setup_avg,
    )


def grid_dims(n: int) -> tuple[int, int]:
    """Most-square grid h x w = n with h <= w."""
    h = math.isqrt(n)
    while h > 1 and n % h:
        h -= 1
    return h, n // h


OBJECTIVES = ("avg", "worst", "rounds")

_MAX_COMMITTEE = 64
_MAX_SHUFFLERS = 64


def optimize(
    n: int,
    gamma: float,
    alpha: float,
    sigma_target: float,
    eta_target: float,
    protocol: str = "amortized",
    objective: str = "avg",
    ell: int = 2,
) -> tuple[CostParams, CostReport]:
    """Search (n_dec, t, n_shuf, d) for the cheapest configuration whose
    exact-tail sigma and eta clear the targets.

    m is pinned to n // n_dec (as many committees as the population
    supports), and the grid protocol uses the most-square grid with the
    default committee count.  Deterministic: candidates are scanned in
    lexicographic parameter order and ties keep the first minimum.
    """
    if protocol not in ("amortized", "alternating"):
        raise DomainError(f"unknown protocol {protocol!r}")
    if objective not in OBJECTIVES:
        raise DomainError(f"unknown objective {objective!r}")
    sigma_budget = 2.0**-sigma_target
    eta_budget = 2.0**-eta_target
    h = w = None
    iter_shapes: list[tuple[int, int]] = []
    if protocol == "alternating":
        h, w = grid_dims(n)
        iter_shapes = [(h, w) if it % 2 == 0 else (w, h) for it in range(ell)]

    # (nd, t) options with their failure masses and decryption costs
    dec_options = []
    for nd in range(2, min(_MAX_COMMITTEE, n) + 1):
        m = n // nd
        dec_member = _bg_dec_member_bytes(math.ceil(n / m))
        dec_total = nd * n * (CT_BYTES + ELEMENT_BYTES) + nd * m * 2 * ELEMENT_BYTES
        for t in range(1, nd + 1):
            c_sigma = m * binom_tail(nd, gamma, t)
            if c_sigma > sigma_budget:
                continue
            c_eta = m * binom_tail(nd, alpha, nd - t + 1)
            if c_eta > eta_budget:
                break  # larger t only drops liveness further
            dec_options.append((nd, t, m, c_sigma, c_eta, dec_member, dec_total))

    # (n_shuf, d) options with their shuffle costs and round counts
    shuf_options = []
    for ns in range(1, min(_MAX_SHUFFLERS, n) + 1):
        for d in range(0, ns):
            need = ns - d
            if protocol == "alternating":
                n_sc = min(n // ns, max(h, w))
                if n_sc < 1:
                    continue
                unions = n_sc
            else:
                n_sc = 0
                unions = 1
            s_sigma = unions * binom_tail(ns, gamma, need)
            s_eta = unions * binom_tail(ns, alpha, d + 1)
            if s_sigma > sigma_budget or s_eta > eta_budget:
                continue
            if protocol == "amortized":
                act_worst = _act_bytes(n, DEFAULT_BG_FRACTION)
                shuffle_total = need * act_worst
                rounds_worst = FRAME_ROUNDS + ns
                pool = ns
            else:
                act_worst = sum(
                    math.ceil(r / n_sc) * _act_bytes(ln, DEFAULT_BG_FRACTION)
                    for r, ln in iter_shapes
                )
                shuffle_total = need * sum(
                    r * _act_bytes(ln, DEFAULT_BG_FRACTION)
                    for r, ln in iter_shapes
                )
                passes = sum(math.ceil(r / n_sc) for r, _ in iter_shapes)
                rounds_worst = FRAME_ROUNDS + passes * ns
                pool = n_sc * ns
            shuf_options.append(
                (ns, d, s_sigma, s_eta, act_worst, shuffle_total,
                 rounds_worst, pool)
            )

    base_input = n * BG_INPUT_BYTES
    best_key = None
    best_combo = None
    for nd, t, m, c_sigma, c_eta, dec_member, dec_total in dec_options:
        member_bytes = BG_INPUT_BYTES + dec_member
        for (ns, d, s_sigma, s_eta, act_worst, shuffle_total,
             rounds_worst, pool) in shuf_options:
            if c_sigma + s_sigma > sigma_budget or c_eta + s_eta > eta_budget:
                continue
            avg = math.ceil((base_input + dec_total + shuffle_total) / n)
            overlap = n - pool < m * nd
            shuffler_bytes = BG_INPUT_BYTES + act_worst + (
                dec_member if overlap else 0
            )
            worst = max(member_bytes, shuffler_bytes)
            scores = {"avg": avg, "worst": worst, "rounds": rounds_worst}
            key = (scores[objective], avg, worst, rounds_worst, nd, t, ns, d)
            if best_key is None or key < best_key:
                best_key = key
                best_combo = (nd, t, m, ns, d)
    if best_combo is None:
        raise Infeasible(
            f"no parameters reach sigma={sigma_target}, eta={eta_target} "
            f"for n={n}, gamma={gamma}, alpha={alpha}"
        )
    nd, t, m, ns, d = best_combo
    best = CostParams(
        n=n, n_dec=nd, m=m, t=t, n_shuf=ns, d=d, gamma=gamma, alpha=alpha,
        ell=None if protocol == "amortized" else ell, h=h, w=w,
    )
    return best, report_for(best, protocol)


# -- exact cut_and_choose profile ---------------------------------------
#
# Mirrors the simulator's honest, dropout-free run message by message.
# Every formula below corresponds to one payload builder in the
# simulator; envelope bytes are added per message, as the transport does.


def _shuffle_req_bytes(cts: int) -> int:
    return wire.size_element() + wire.size_ciphertext_list(cts)


def _shuffle_resp_bytes(bundles: int, width: int, sigma_rep: int) -> int:
    cts = bundles * width
    return (
        wire.size_ciphertext_list(cts)
        + wire.size_u32()
        + sigma_rep * wire.size_ciphertext_list(cts)
        + sigma_rep * (
            wire.size_u32_list(bundles) + wire.size_scalar_list(cts)
        )
    )


def _publish_bytes(is_member: bool) -> int:
    base = 2 * wire.size_element() + 2 * wire.size_u32()
    return base + (wire.size_scalar() if is_member else 0)


def _partial_dec_bytes(values: int) -> int:
    return (
        wire.size_element_list(values)
        + wire.size_element()
        + wire.size_element_list(values)
        + wire.size_scalar()
    )


def cc_client_bytes(cfg) -> dict:
    """Predicted per-party byte totals for an honest, dropout-free run
    of the simulator on this config: {"sent": {...}, "received": {...}}
    keyed like the simulator's accounting (client ids as strings, "S"
    for the server)."""
    cfg.validate()
    group = GROUPS[cfg.group]
    width = group.elements_per_payload
    n = cfg.n_clients
    m = cfg.n_committees
    nd = cfg.committee_size
    sent = {str(cid): 0 for cid in range(n)}
    recv = {str(cid): 0 for cid in range(n)}
    sent["S"] = recv["S"] = 0

    def exchange(cid: int, down: int, up: int) -> None:
        recv[str(cid)] += down + ENVELOPE
        sent["S"] += down + ENVELOPE
        sent[str(cid)] += up + ENVELOPE
        recv["S"] += up + ENVELOPE

    # key agreement
    for i in range(1, m + 1):
        msgs = _ka_member_msgs(nd, m, cfg.threshold, i)
        down1 = (
            msgs["recv"]["roster"],
            msgs["recv"]["relay"],
            msgs["recv"]["adjudication"],
        )
        up1 = (
            msgs["sent"]["dealing"],
            msgs["sent"]["faults"],
            msgs["sent"]["offset"],
        )
        for j in range(nd):
            cid = (i - 1) * nd + j
            for down, up in zip(down1, up1):
                exchange(cid, down, up)
    # publish + input
    members = m * nd
    input_up = wire.size_ciphertext_list(width)
    for cid in range(n):
        exchange(cid, _publish_bytes(cid < members), input_up)
    # shuffling
    need = cfg.n_shufflers - cfg.dropout_allowance
    if cfg.protocol == "amortized":
        req = _shuffle_req_bytes(n * width)
        resp = _shuffle_resp_bytes(n, width, cfg.sigma_rep)
        for cid in range(n - cfg.n_shufflers, n - cfg.n_shufflers + need):
            exchange(cid, req, resp)
    else:
        n_sc = cfg.n_shuffle_committees or min(
            n // cfg.n_shufflers, max(cfg.grid_h, cfg.grid_w)
        )
        pool_base = n - n_sc * cfg.n_shufflers
        for it in range(cfg.iterations):
            rows = cfg.grid_h if it % 2 == 0 else cfg.grid_w
            row_len = cfg.grid_w if it % 2 == 0 else cfg.grid_h
            req = _shuffle_req_bytes(row_len * width)
            resp = _shuffle_resp_bytes(row_len, width, cfg.sigma_rep)
            for r in range(rows):
                committee = r % n_sc
                for pos in range(need):
                    cid = pool_base + committee * cfg.n_shufflers + pos
                    exchange(cid, req, resp)
    # decryption
    n_b = n
    sizes = [n_b // m + (1 if i < n_b % m else 0) for i in range(m)]
    for i in range(1, m + 1):
        k = sizes[i - 1] * width
        req = wire.size_ciphertext_list(k)
        resp = _partial_dec_bytes(k)
        for j in range(nd):
            exchange((i - 1) * nd + j, req, resp)
    return {"sent": sent, "received": recv}


def params_from_config(cfg, gamma: float = 0.0, alpha: float = 0.0) -> CostParams:
    """Lift a simulator config into cost-model parameters."""
    alternating = cfg.protocol == "alternating"
    n_sc = None
    if alternating:
        n_sc = cfg.n_shuffle_committees or min(
            cfg.n_clients // cfg.n_shufflers, max(cfg.grid_h, cfg.grid_w)
        )
    return CostParams(
        n=cfg.n_clients,
        n_dec=cfg.committee_size,
        m=cfg.n_committees,
        t=cfg.threshold,
        n_shuf=cfg.n_shufflers,
        d=cfg.dropout_allowance,
        gamma=gamma,
        alpha=alpha,
        ell=cfg.iterations if alternating else None,
        h=cfg.grid_h if alternating else None,
        w=cfg.grid_w if alternating else None,
        n_sc=n_sc,
        proof_model="cut_and_choose",
        sigma_rep=cfg.sigma_rep,
    )


# -- sweeps -------------------------------------------------------------

CSV_COLUMNS = (
    "n", "protocol", "sigma", "eta", "rounds_best", "rounds_worst",
    "bytes_worst", "bytes_avg",
)


def sweep_rows(
    sizes: list[int],
    protocols: tuple[str, ...] = ("amortized", "alternating"),
    gamma: float = 0.05,
    alpha: float = 0.05,
    sigma_target: float = 40.0,
    eta_target: float = 10.0,
    objective: str = "avg",
) -> list[dict]:
    rows = []
    for n in sizes:
        for protocol in protocols:
            params, report = optimize(
                n, gamma, alpha, sigma_target, eta_target, protocol,
                objective,
            )
            rows.append({
                "n": n,
                "protocol": protocol,
                "sigma": round(report.sigma, 3),
                "eta": round(report.eta, 3),
                "rounds_best": report.rounds_best,
                "rounds_worst": report.rounds_worst,
                "bytes_worst": report.bytes_worst_client,
                "bytes_avg": report.bytes_avg_client,
            })
    return rows
