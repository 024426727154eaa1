"""Synthetic IoT flow-record generator for benchmarks and examples.

Emits CSV-compatible tables with the full 46-column flow schema and the
34-label taxonomy, with class proportions matching the reference corpus
mix.  The feature distributions are built from per-category prototypes
(protocol indicators, flag rates, log-normal volume statistics) plus
per-label variations, a controlled share of cross-category look-alike
rows whose true class is only recoverable from feature interactions, and
an optional labelling-error rate that caps achievable accuracy (off by
default: exponential-loss boosting is extremely sensitive to mislabeled
rows, which real flow captures rarely contain).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .data import FeatureMatrix
from .taxonomy import DEFAULT_TAXONOMY, FLOW_FEATURES

# Reference corpus label mix (category -> row count in the source population).
CATEGORY_POPULATION = {
    "ddos": 820_525,
    "dos": 181_481,
    "mirai": 59_233,
    "benign": 24_000,
    "recon": 7_136,
    "mitm": 7_019,
    "dns_spoofing": 4_034,
    "brute_force": 3_244,
    "vulnerability_scan": 809,
    "web_other": 538,
}

# Relative label weights inside each category (population is split
# proportionally; single-label categories need no entry).
LABEL_WEIGHTS = {
    "ddos_icmp_flood": 14.0,
    "ddos_udp_flood": 11.0,
    "ddos_tcp_flood": 9.0,
    "ddos_pshack_flood": 8.0,
    "ddos_syn_flood": 8.0,
    "ddos_rstfin_flood": 8.0,
    "ddos_synonymous_ip_flood": 7.0,
    "ddos_ack_fragmentation": 6.0,
    "ddos_icmp_fragmentation": 5.0,
    "ddos_udp_fragmentation": 5.0,
    "ddos_http_flood": 3.0,
    "ddos_slowloris": 0.5,
    "dos_udp_flood": 10.0,
    "dos_tcp_flood": 9.0,
    "dos_syn_flood": 8.0,
    "dos_http_flood": 3.0,
    "mirai_greeth_flood": 6.0,
    "mirai_udpplain": 5.0,
    "mirai_greip_flood": 4.0,
    "recon_host_discovery": 4.0,
    "recon_os_scan": 3.0,
    "recon_port_scan": 3.0,
    "recon_ping_sweep": 2.0,
}

_LOGN_DEFAULT = {
    "flow_duration": (1.0, 0.7),
    "duration": (4.1, 0.2),
    "rate": (2.0, 0.7),
    "number": (2.0, 0.6),
    "tot_size": (4.6, 0.5),
    "radius": (3.0, 0.6),
    "covariance": (4.0, 0.6),
    "weight": (5.0, 0.15),
    "magnitude": (2.2, 0.35),
    "variance": (1.5, 0.5),
}

# Per-category log-space (mean, sigma) overrides for the volume block.
# The packets-per-second band is laid out so category supports are nearly
# disjoint; deliberate confusion comes from the look-alike modes instead.
_LOGN_BY_CATEGORY = {
    "rate": {
        "benign": (1.8, 0.6),
        "ddos": (8.0, 0.3),
        "dos": (3.6, 0.3),
        "mirai": (4.9, 0.2),
        "recon": (-0.5, 0.4),
        "mitm": (-0.1, 0.35),
        "dns_spoofing": (1.3, 0.4),
        "brute_force": (0.9, 0.4),
        "vulnerability_scan": (-0.5, 0.4),
        "web_other": (2.0, 0.5),
    },
    "number": {
        "benign": (1.9, 0.7),
        "ddos": (4.8, 0.3),
        "dos": (3.2, 0.3),
        "mirai": (4.7, 0.2),
        "recon": (0.9, 0.4),
        "mitm": (0.8, 0.4),
        "dns_spoofing": (1.3, 0.4),
        "brute_force": (2.3, 0.4),
        "vulnerability_scan": (1.2, 0.4),
        "web_other": (2.6, 0.5),
    },
    "tot_size": {
        "benign": (5.8, 0.7),
        "ddos": (4.05, 0.25),
        "dos": (4.7, 0.25),
        "mirai": (3.3, 0.2),
        "recon": (3.9, 0.25),
        "mitm": (4.6, 0.4),
        "dns_spoofing": (4.4, 0.3),
        "brute_force": (4.4, 0.3),
        "vulnerability_scan": (4.2, 0.3),
        "web_other": (7.2, 0.4),
    },
    "flow_duration": {
        "benign": (1.5, 0.9),
        "ddos": (0.3, 0.4),
        "dos": (1.3, 0.35),
        "mirai": (2.9, 0.3),
        "recon": (-1.2, 0.5),
        "mitm": (1.8, 0.5),
        "dns_spoofing": (-0.5, 0.5),
        "brute_force": (0.9, 0.35),
        "vulnerability_scan": (0.2, 0.5),
        "web_other": (1.2, 0.5),
    },
    "radius": {"benign": (3.1, 0.7)},
    "weight": {"mirai": (6.2, 0.15)},
}

_BERN_DEFAULT = {
    "tcp": 0.5,
    "udp": 0.3,
    "http": 0.03,
    "https": 0.02,
    "dns": 0.03,
    "telnet": 0.004,
    "smtp": 0.004,
    "ssh": 0.006,
    "irc": 0.003,
    "dhcp": 0.008,
    "arp": 0.004,
    "icmp": 0.02,
    "ipv": 0.98,
    "llc": 0.95,
    "fin_flag_number": 0.08,
    "syn_flag_number": 0.15,
    "rst_flag_number": 0.06,
    "psh_flag_number": 0.15,
    "ack_flag_number": 0.2,
    "ece_flag_number": 0.01,
    "cwr_flag_number": 0.01,
}

_BERN_BY_CATEGORY = {
    "tcp": {
        "benign": 0.75, "ddos": 0.55, "dos": 0.65, "mirai": 0.2, "recon": 0.75,
        "mitm": 0.2, "dns_spoofing": 0.05, "brute_force": 0.95,
        "vulnerability_scan": 0.9, "web_other": 1.0,
    },
    "udp": {
        "benign": 0.35, "ddos": 0.4, "dos": 0.35, "mirai": 0.8, "recon": 0.2,
        "mitm": 0.3, "dns_spoofing": 0.95, "brute_force": 0.05,
        "vulnerability_scan": 0.1, "web_other": 0.02,
    },
    "http": {
        "benign": 0.3, "ddos": 0.04, "dos": 0.06, "recon": 0.05, "mitm": 0.05,
        "brute_force": 0.2, "vulnerability_scan": 0.5, "web_other": 0.8,
    },
    "https": {"benign": 0.45, "web_other": 0.5, "brute_force": 0.1,
              "vulnerability_scan": 0.3, "mitm": 0.05},
    "dns": {"benign": 0.3, "dns_spoofing": 0.97, "mitm": 0.15},
    "telnet": {"brute_force": 0.35, "benign": 0.02},
    "smtp": {"benign": 0.05, "brute_force": 0.12},
    "ssh": {"brute_force": 0.55, "benign": 0.08, "vulnerability_scan": 0.05},
    "irc": {"benign": 0.01, "web_other": 0.08},
    "dhcp": {"benign": 0.06, "mitm": 0.12},
    "arp": {"mitm": 0.95, "benign": 0.03, "recon": 0.15},
    "icmp": {"benign": 0.08, "recon": 0.4, "mitm": 0.45, "ddos": 0.12, "dos": 0.1},
    "ipv": {"mitm": 0.35},
    "fin_flag_number": {"benign": 0.25, "web_other": 0.3, "brute_force": 0.3,
                        "ddos": 0.1, "dos": 0.1, "recon": 0.05},
    "syn_flag_number": {"recon": 0.75, "vulnerability_scan": 0.6, "ddos": 0.3,
                        "dos": 0.3, "brute_force": 0.35, "benign": 0.3},
    "rst_flag_number": {"vulnerability_scan": 0.35, "recon": 0.2, "ddos": 0.12,
                        "dos": 0.1, "benign": 0.08},
    "psh_flag_number": {"benign": 0.5, "web_other": 0.7, "brute_force": 0.65,
                        "ddos": 0.2, "dos": 0.25},
    "ack_flag_number": {"benign": 0.7, "web_other": 0.8, "brute_force": 0.8,
                        "vulnerability_scan": 0.5, "ddos": 0.3, "dos": 0.35,
                        "recon": 0.2},
}

_POIS_DEFAULT = {
    "ack_count": 0.6,
    "syn_count": 0.5,
    "fin_count": 0.3,
    "urg_count": 0.02,
    "rst_count": 0.3,
}

# Flag observation noise: aggregation over truncated or re-ordered captures
# occasionally records a protocol bit the flow did not set and vice versa.
_FLAG_FLIP = 0.015

# Idle capture windows: every device, whatever its role, emits the same
# sparse keepalive chatter between bursts of real activity.  The volume
# profile of such windows is class-independent, so a slice of every label
# sits in one shared low-rate mode.
_IDLE_SHELF_SHARE = 0.02
# Attack tooling spends different fractions of a capture window paused:
# botnet nodes beacon between bursts, scripted single-source floods pause
# only to recover, and spoofed multi-source floods barely pause at all.
_IDLE_SHELF_BY_CATEGORY = {"ddos": 0.0025, "dos": 0.012, "mirai": 0.035}
_IDLE_SHELF_LOGN = {
    "rate": (2.7, 0.15),
    "number": (1.5, 0.25),
    "tot_size": (4.0, 0.3),
    "flow_duration": (2.2, 0.3),
}
# Keepalive chatter still reflects the sender's stack, but only in which
# flag combinations co-occur: within the shared idle mode every single flag
# and every flag pair is evenly split across roles, so idle windows separate
# only when several flags are conditioned jointly.
_IDLE_CODE_FLAGS = ("syn_flag_number", "ack_flag_number", "psh_flag_number",
                    "rst_flag_number", "fin_flag_number")
_IDLE_CODE = {"benign": (0, 0), "ddos": (0, 1), "dos": (1, 0), "mirai": (1, 1)}

_POIS_BY_CATEGORY = {
    "ack_count": {"benign": 4.0, "web_other": 6.0, "brute_force": 7.0,
                  "vulnerability_scan": 1.5, "ddos": 0.5, "dos": 0.6,
                  "mirai": 0.3, "recon": 0.4, "mitm": 0.8, "dns_spoofing": 0.6},
    "syn_count": {"recon": 5.0, "vulnerability_scan": 4.0, "benign": 1.2,
                  "ddos": 1.0, "dos": 1.0, "brute_force": 1.5},
    "fin_count": {"benign": 1.0, "web_other": 1.5, "brute_force": 1.2},
    "urg_count": {"dos": 6.0},
    "rst_count": {"vulnerability_scan": 3.0, "recon": 1.0, "benign": 0.5,
                  "web_other": 0.7, "dns_spoofing": 4.0},
}

# Per-label deviations: plain keys override probabilities / Poisson means,
# "mu:<feature>" keys shift the log-space mean of a volume feature.
LABEL_OVERRIDES: dict[str, dict[str, float]] = {
    "ddos_icmp_flood": {"icmp": 0.97, "tcp": 0.02, "udp": 0.02},
    "ddos_udp_flood": {"udp": 0.97, "tcp": 0.02},
    "ddos_tcp_flood": {"tcp": 0.97, "udp": 0.02},
    "ddos_pshack_flood": {"tcp": 0.97, "psh_flag_number": 0.95,
                          "ack_flag_number": 0.95},
    "ddos_syn_flood": {"tcp": 0.97, "syn_flag_number": 0.97, "syn_count": 7.0},
    "ddos_rstfin_flood": {"tcp": 0.97, "rst_flag_number": 0.9,
                          "fin_flag_number": 0.9, "rst_count": 5.0,
                          "fin_count": 4.0},
    "ddos_synonymous_ip_flood": {"tcp": 0.97, "syn_flag_number": 0.85},
    "ddos_icmp_fragmentation": {"icmp": 0.97, "tcp": 0.02, "udp": 0.02,
                                "mu:tot_size": 0.5},
    "ddos_udp_fragmentation": {"udp": 0.97, "tcp": 0.02, "mu:tot_size": 0.5},
    "ddos_ack_fragmentation": {"tcp": 0.9, "ack_flag_number": 0.9,
                               "mu:tot_size": 0.5},
    "ddos_http_flood": {"http": 0.95, "tcp": 0.97, "mu:rate": -0.4},
    "ddos_slowloris": {"http": 0.95, "tcp": 0.97, "psh_flag_number": 0.9,
                       "mu:rate": -0.4, "mu:flow_duration": 2.5,
                       "mu:number": -1.2},
    "dos_udp_flood": {"udp": 0.95, "tcp": 0.03},
    "dos_tcp_flood": {"tcp": 0.95, "udp": 0.03},
    "dos_syn_flood": {"tcp": 0.95, "syn_flag_number": 0.95, "syn_count": 6.0},
    "dos_http_flood": {"http": 0.9, "tcp": 0.95, "mu:rate": -0.3},
    # GRE floods carry neither TCP, UDP nor ICMP markers, so they fall into
    # the residual protocol bucket with its short header.
    "mirai_greeth_flood": {"udp": 0.03, "tcp": 0.02},
    "mirai_udpplain": {"udp": 0.95, "tcp": 0.02, "mu:rate": 0.2},
    "mirai_greip_flood": {"udp": 0.03, "tcp": 0.02, "icmp": 0.08},
    "recon_host_discovery": {"arp": 0.25, "icmp": 0.4, "tcp": 0.3},
    "recon_os_scan": {"tcp": 0.9, "syn_flag_number": 0.8},
    "recon_port_scan": {"tcp": 0.92, "syn_flag_number": 0.85, "syn_count": 7.0},
    "recon_ping_sweep": {"icmp": 0.95, "tcp": 0.03, "syn_count": 0.2},
    "sql_injection": {"http": 0.85},
    "command_injection": {"http": 0.8},
    "backdoor_malware": {"irc": 0.25, "http": 0.4, "mu:flow_duration": 1.0},
    "uploading_attack": {"http": 0.85, "mu:tot_size": 1.2},
    "xss": {"http": 0.9},
    "browser_hijacking": {"http": 0.7, "https": 0.3},
}

# Benign traffic is itself a mixture of usage modes.
_BENIGN_MODES = (
    # (share, overrides)
    (0.40, {"http": 0.6, "https": 0.6, "mu:tot_size": 0.8}),
    (0.25, {"dns": 0.95, "udp": 0.9, "tcp": 0.1, "mu:tot_size": -0.6,
            "rst_count": 0.1}),
    (0.10, {"ssh": 0.8, "tcp": 0.98, "udp": 0.02, "mu:flow_duration": 1.0,
            "mu:tot_size": 0.5}),
    (0.25, {"mu:rate": -0.9, "mu:number": -1.0}),
)

# Confusable category pairs: a fraction of rows from both sides is drawn
# from one shared coarse distribution, with the true class recoverable only
# through a chain of conditionally informative interaction cells.
_HARD_SHARED_LOGN = {
    "rate": (6.2, 0.2),
    "number": (4.0, 0.35),
    "tot_size": (4.25, 0.3),
    "flow_duration": (0.45, 0.45),
}
_HARD_SHARED_BERN = {
    "tcp": 0.55, "udp": 0.45, "http": 0.03, "icmp": 0.05,
    "syn_flag_number": 0.35, "ack_flag_number": 0.3, "psh_flag_number": 0.2,
    "rst_flag_number": 0.08, "fin_flag_number": 0.08,
}
_HARD_SHARED_POIS = {"ack_count": 0.5, "syn_count": 1.0, "rst_count": 0.4,
                     "fin_count": 0.3, "urg_count": 0.05}
# Interaction-cell chain: (strength, carriers), each carrier being
# (feature, low center, high center).  Every carrier of a rung encodes the
# same bit with independent cell noise.  The first rung is weakly
# class-correlated on its own; every later rung is informative only
# conditional on the parity of the rungs before it, so each extra
# conditioning level recovers more of the hard rows while single-threshold
# views stay near the first rung's strength.
_LADDER = (
    (0.70, (("covariance", 3.66, 4.34), ("variance", 1.22, 1.78),
            ("weight", 4.915, 5.085))),
    (0.80, (("radius", 2.66, 3.34), ("std", 2.66, 3.34))),
    (0.86, (("magnitude", 2.0, 2.4), ("duration", 3.90, 4.30))),
    (0.99, (("min", 3.3, 3.9), ("max", 4.4, 5.0),
            ("avg", 4.0, 4.5), ("tot_sum", 8.0, 8.55))),
)
_CELL_SIGMA = 0.04


@dataclass
class SynthConfig:
    rows: int = 200_000
    seed: int = 0
    label_noise: float = 0.0
    hard_pair_fraction: float = 0.14
    missing_rate: float = 0.001
    min_rows_per_label: int = 2

    def __post_init__(self) -> None:
        if self.rows < 1:
            raise ValueError("rows must be positive")
        for name in ("label_noise", "hard_pair_fraction", "missing_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def label_counts(rows: int, min_per_label: int = 2) -> dict[str, int]:
    """Per-label row allocation following the reference corpus proportions."""
    taxonomy = DEFAULT_TAXONOMY
    cats = list(CATEGORY_POPULATION)
    pop = np.array([CATEGORY_POPULATION[c] for c in cats], dtype=np.float64)
    share = pop / pop.sum() * rows
    base = np.floor(share).astype(np.int64)
    rem = share - base
    extra = rows - int(base.sum())
    order = np.lexsort((np.arange(len(cats)), -rem))
    base[order[:extra]] += 1

    out: dict[str, int] = {}
    for c, cat_total in zip(cats, base):
        labels = [l for l in taxonomy.labels if taxonomy.category_of(l) == c]
        w = np.array([LABEL_WEIGHTS.get(l, 1.0) for l in labels])
        share_l = w / w.sum() * cat_total
        base_l = np.floor(share_l).astype(np.int64)
        rem_l = share_l - base_l
        extra_l = int(cat_total - base_l.sum())
        order_l = np.lexsort((np.arange(len(labels)), -rem_l))
        base_l[order_l[:extra_l]] += 1
        for l, n in zip(labels, base_l):
            out[l] = int(n)

    # guarantee a workable floor for tiny samples, stealing from the largest
    for l in out:
        if out[l] < min_per_label:
            need = min_per_label - out[l]
            donor = max(out, key=out.get)
            out[donor] -= need
            out[l] = min_per_label
    if min(out.values()) < 0:
        raise ValueError(f"rows={rows} is too small for the 34-label mix")
    return out


def _param(table_default, table_by_cat, feature, category):
    byc = table_by_cat.get(feature, {})
    return byc.get(category, table_default[feature])


def _fill_block(cols: dict[str, np.ndarray], label: str, category: str,
                rows: np.ndarray, rng: np.random.Generator,
                overrides: dict[str, float]) -> None:
    """Sample every raw feature for the given row indices in place."""
    n = rows.size

    def mu_shift(feature: str) -> float:
        return float(overrides.get(f"mu:{feature}", 0.0))

    logn = {}
    idle_share = _IDLE_SHELF_BY_CATEGORY.get(category, _IDLE_SHELF_SHARE)
    idle = rng.random(n) < idle_share
    n_idle = int(idle.sum())
    for feat in _LOGN_DEFAULT:
        mu, sigma = _param(_LOGN_DEFAULT, _LOGN_BY_CATEGORY, feat, category)
        vals = np.exp(rng.normal(mu + mu_shift(feat), sigma, n))
        if feat in _IDLE_SHELF_LOGN and n_idle:
            s_mu, s_sigma = _IDLE_SHELF_LOGN[feat]
            vals[idle] = np.exp(rng.normal(s_mu, s_sigma, n_idle))
        logn[feat] = vals
    for feat in _BERN_DEFAULT:
        p = _param(_BERN_DEFAULT, _BERN_BY_CATEGORY, feat, category)
        p = float(overrides.get(feat, p))
        p = _FLAG_FLIP + (1.0 - 2.0 * _FLAG_FLIP) * p
        cols[feat][rows] = (rng.random(n) < p).astype(np.float64)
    code = _IDLE_CODE.get(category)
    if code is not None and n_idle:
        p1, p2 = code
        f1 = rng.integers(0, 2, n_idle)
        f2 = rng.integers(0, 2, n_idle)
        f4 = rng.integers(0, 2, n_idle)
        f3 = p1 ^ f1 ^ f2
        f5 = p2 ^ f3 ^ f4
        ridx = rows[idle]
        for feat, bits in zip(_IDLE_CODE_FLAGS, (f1, f2, f3, f4, f5)):
            flip = rng.random(n_idle) < _FLAG_FLIP
            cols[feat][ridx] = (bits ^ flip).astype(np.float64)
    for feat in _POIS_DEFAULT:
        lam = _param(_POIS_DEFAULT, _POIS_BY_CATEGORY, feat, category)
        lam = float(overrides.get(feat, lam))
        cols[feat][rows] = rng.poisson(lam, n).astype(np.float64)
    for feat, vals in logn.items():
        cols[feat][rows] = vals


def _derive_block(cols: dict[str, np.ndarray], rows: np.ndarray,
                  rng: np.random.Generator, attack_like: bool) -> None:
    """Columns computed from the sampled primaries for consistency."""
    n = rows.size
    rate = cols["rate"][rows]
    cols["srate"][rows] = rate * rng.uniform(0.7, 1.0, n)
    down = rng.uniform(0.0, 0.02, n) if attack_like else rng.uniform(0.2, 0.8, n)
    cols["drate"][rows] = rate * down
    cols["iat"][rows] = (1.0 / np.maximum(rate, 1e-9)) * np.exp(rng.normal(0, 0.3, n))
    avg = cols["tot_size"][rows] * np.exp(rng.normal(0, 0.1, n))
    mn = avg * rng.uniform(0.3, 0.9, n)
    mx = avg * (1.0 + rng.uniform(0.2, 2.0, n))
    std = (mx - mn) * rng.uniform(0.2, 0.5, n)
    cols["avg"][rows] = avg
    cols["min"][rows] = mn
    cols["max"][rows] = mx
    cols["std"][rows] = std
    cols["tot_sum"][rows] = avg * cols["number"][rows]
    tcp = cols["tcp"][rows]
    udp = cols["udp"][rows]
    icmp = cols["icmp"][rows]
    proto = np.where(tcp == 1, 6.0, np.where(udp == 1, 17.0, np.where(icmp == 1, 1.0, 2.0)))
    cols["protocol_type"][rows] = proto
    header = np.where(tcp == 1, 32.0, np.where(udp == 1, 8.0, np.where(icmp == 1, 8.0, 14.0)))
    cols["header_length"][rows] = header * np.exp(rng.normal(0, 0.05, n))


def _plant_hard_pair(cols: dict[str, np.ndarray], rows_a: np.ndarray,
                     rows_b: np.ndarray, rng: np.random.Generator) -> None:
    """Overwrite both sides with one shared coarse mode; the true side is
    recoverable only by descending the interaction-cell chain."""
    both = np.concatenate([rows_a, rows_b])
    n = both.size
    for feat, (mu, sigma) in _HARD_SHARED_LOGN.items():
        cols[feat][both] = np.exp(rng.normal(mu, sigma, n))
    for feat, p in _HARD_SHARED_BERN.items():
        cols[feat][both] = (rng.random(n) < p).astype(np.float64)
    for feat, lam in _HARD_SHARED_POIS.items():
        cols[feat][both] = rng.poisson(lam, n).astype(np.float64)
    _derive_block(cols, both, rng, attack_like=True)

    side = np.zeros(n, dtype=np.int64)
    side[rows_a.size:] = 1
    parity = np.zeros(n, dtype=np.int64)
    for j, (strength, carriers) in enumerate(_LADDER):
        if j == 0:
            p_one = np.where(side == 1, strength, 1.0 - strength)
        else:
            # informative only given the parity of the previous rungs, so
            # the single-feature view of this rung carries no class signal
            p_one = np.where((side ^ parity) == 1, strength, 1.0 - strength)
        bit = (rng.random(n) < p_one).astype(np.int64)
        parity ^= bit
        for feat, lo, hi in carriers:
            center = np.where(bit == 1, hi, lo)
            cols[feat][both] = np.exp(rng.normal(center, _CELL_SIGMA))


def generate_flows(config: SynthConfig | None = None):
    """Build one synthetic corpus; returns (FeatureMatrix, label list)."""
    config = config or SynthConfig()
    taxonomy = DEFAULT_TAXONOMY
    counts = label_counts(config.rows, config.min_rows_per_label)
    n = config.rows
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))

    cols = {feat: np.zeros(n, dtype=np.float64) for feat in FLOW_FEATURES}
    labels = np.empty(n, dtype=object)
    start = 0
    spans: dict[str, np.ndarray] = {}
    for label in taxonomy.labels:
        c = counts[label]
        rows = np.arange(start, start + c)
        spans[label] = rows
        labels[rows] = label
        start += c

    for label, rows in spans.items():
        category = taxonomy.category_of(label)
        overrides = dict(LABEL_OVERRIDES.get(label, {}))
        if label == "benign_traffic":
            shares = np.array([s for s, _ in _BENIGN_MODES])
            mode = rng.choice(len(_BENIGN_MODES), size=rows.size, p=shares / shares.sum())
            for m, (_, mode_over) in enumerate(_BENIGN_MODES):
                sub = rows[mode == m]
                if sub.size:
                    merged = dict(overrides)
                    merged.update(mode_over)
                    _fill_block(cols, label, category, sub, rng, merged)
                    _derive_block(cols, sub, rng, attack_like=False)
        else:
            _fill_block(cols, label, category, rows, rng, overrides)
            _derive_block(cols, rows, rng, attack_like=category != "benign")

    # look-alike rows for the confusable flood pair
    if config.hard_pair_fraction > 0:
        rows_a = np.concatenate([spans[l] for l in taxonomy.labels
                                 if taxonomy.category_of(l) == "ddos"])
        rows_b = np.concatenate([spans[l] for l in taxonomy.labels
                                 if taxonomy.category_of(l) == "dos"])
        h = int(round(config.hard_pair_fraction * min(rows_a.size, rows_b.size)))
        if h > 0:
            pick_a = rng.choice(rows_a, size=h, replace=False)
            pick_b = rng.choice(rows_b, size=h, replace=False)
            _plant_hard_pair(cols, pick_a, pick_b, rng)

    # labelling errors: reassign a small share of rows across categories
    n_noise = int(round(config.label_noise * n))
    if n_noise:
        noisy = rng.choice(n, size=n_noise, replace=False)
        cats = list(CATEGORY_POPULATION)
        cat_p = np.array([CATEGORY_POPULATION[c] for c in cats], dtype=np.float64)
        for i in noisy:
            current = taxonomy.category_of(labels[i])
            p = cat_p.copy()
            p[cats.index(current)] = 0.0
            new_cat = cats[rng.choice(len(cats), p=p / p.sum())]
            members = [l for l in taxonomy.labels
                       if taxonomy.category_of(l) == new_cat]
            w = np.array([LABEL_WEIGHTS.get(l, 1.0) for l in members])
            labels[i] = members[rng.choice(len(members), p=w / w.sum())]

    X = np.column_stack([cols[feat] for feat in FLOW_FEATURES])

    # sparse missingness over the volume statistics
    if config.missing_rate > 0:
        vol_cols = [FLOW_FEATURES.index(f) for f in
                    ("flow_duration", "rate", "srate", "drate", "tot_sum",
                     "min", "max", "avg", "std", "tot_size", "iat",
                     "magnitude", "radius", "covariance", "variance")]
        n_miss = int(round(config.missing_rate * n * len(vol_cols)))
        if n_miss:
            ridx = rng.integers(0, n, n_miss)
            cidx = rng.integers(0, len(vol_cols), n_miss)
            X[ridx, np.array(vol_cols)[cidx]] = np.nan

    perm = rng.permutation(n)
    X = np.ascontiguousarray(X[perm])
    label_list = [str(l) for l in labels[perm]]
    return FeatureMatrix(X, list(FLOW_FEATURES)), label_list


def write_flow_csv(path, config: SynthConfig | None = None) -> int:
    """Generate a corpus and write it as CSV with a trailing label column."""
    fm, labels = generate_flows(config)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(fm.feature_names) + ["label"])
        for i in range(fm.row_count):
            row = [repr(v) if v == v else "" for v in fm.values[i]]
            writer.writerow(row + [labels[i]])
    return fm.row_count
