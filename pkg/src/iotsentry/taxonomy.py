"""Label taxonomy and reference feature schema for IoT flow records.

The dataset labels each flow with one of 34 fine-grained classes.  Those
roll up into 10 categories (one of which is benign traffic), and the
categories roll up into a binary attack/benign view.  The constants here
describe that hierarchy plus the 46 numeric flow features.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ATTACK34 = "attack34"
CATEGORY10 = "category10"
BINARY2 = "binary2"
LEVELS = (ATTACK34, CATEGORY10, BINARY2)

BINARY_ATTACK = "attack"
BINARY_BENIGN = "benign"

# 46 numeric flow statistics, in canonical column order.
FLOW_FEATURES = [
    "flow_duration",
    "header_length",
    "protocol_type",
    "duration",
    "rate",
    "srate",
    "drate",
    "fin_flag_number",
    "syn_flag_number",
    "rst_flag_number",
    "psh_flag_number",
    "ack_flag_number",
    "ece_flag_number",
    "cwr_flag_number",
    "ack_count",
    "syn_count",
    "fin_count",
    "urg_count",
    "rst_count",
    "http",
    "https",
    "dns",
    "telnet",
    "smtp",
    "ssh",
    "irc",
    "tcp",
    "udp",
    "dhcp",
    "arp",
    "icmp",
    "ipv",
    "llc",
    "tot_sum",
    "min",
    "max",
    "avg",
    "std",
    "tot_size",
    "iat",
    "number",
    "magnitude",
    "radius",
    "covariance",
    "variance",
    "weight",
]

_ATTACK_TO_CATEGORY = {
    # Distributed denial of service (12 variants).
    "ddos_icmp_flood": "ddos",
    "ddos_udp_flood": "ddos",
    "ddos_tcp_flood": "ddos",
    "ddos_pshack_flood": "ddos",
    "ddos_syn_flood": "ddos",
    "ddos_rstfin_flood": "ddos",
    "ddos_synonymous_ip_flood": "ddos",
    "ddos_icmp_fragmentation": "ddos",
    "ddos_udp_fragmentation": "ddos",
    "ddos_ack_fragmentation": "ddos",
    "ddos_http_flood": "ddos",
    "ddos_slowloris": "ddos",
    # Single-source denial of service (4 variants).
    "dos_udp_flood": "dos",
    "dos_tcp_flood": "dos",
    "dos_syn_flood": "dos",
    "dos_http_flood": "dos",
    # Mirai botnet traffic (3 variants).
    "mirai_greeth_flood": "mirai",
    "mirai_udpplain": "mirai",
    "mirai_greip_flood": "mirai",
    # Reconnaissance (4 variants).
    "recon_host_discovery": "recon",
    "recon_os_scan": "recon",
    "recon_port_scan": "recon",
    "recon_ping_sweep": "recon",
    # Man in the middle, spoofing, credential and scan attacks.
    "mitm_arp_spoofing": "mitm",
    "dns_spoofing": "dns_spoofing",
    "dictionary_brute_force": "brute_force",
    "vulnerability_scan": "vulnerability_scan",
    # Web and injection attacks, grouped as "other".
    "sql_injection": "web_other",
    "command_injection": "web_other",
    "backdoor_malware": "web_other",
    "uploading_attack": "web_other",
    "xss": "web_other",
    "browser_hijacking": "web_other",
    # Normal traffic.
    "benign_traffic": "benign",
}


@dataclass(frozen=True)
class LabelTaxonomy:
    """Total mapping from fine-grained labels to category and binary classes."""

    attack_to_category: dict[str, str] = field(
        default_factory=lambda: dict(_ATTACK_TO_CATEGORY)
    )
    benign_category: str = "benign"

    def __post_init__(self) -> None:
        if not self.attack_to_category:
            raise ValueError("taxonomy mapping is empty")
        categories = set(self.attack_to_category.values())
        if self.benign_category not in categories:
            raise ValueError(
                f"benign category {self.benign_category!r} missing from taxonomy"
            )

    @property
    def labels(self) -> list[str]:
        return list(self.attack_to_category)

    @property
    def categories(self) -> list[str]:
        seen: list[str] = []
        for cat in self.attack_to_category.values():
            if cat not in seen:
                seen.append(cat)
        return seen

    def category_of(self, label: str) -> str:
        if label not in self.attack_to_category:
            raise ValueError(f"unknown label {label!r}")
        return self.attack_to_category[label]

    def binary_of(self, label: str) -> str:
        if self.category_of(label) == self.benign_category:
            return BINARY_BENIGN
        return BINARY_ATTACK

    def map_label(self, label: str, level: str) -> str:
        """Project a fine-grained label onto the requested level."""
        if level == ATTACK34:
            if label not in self.attack_to_category:
                raise ValueError(f"unknown label {label!r}")
            return label
        if level == CATEGORY10:
            return self.category_of(label)
        if level == BINARY2:
            return self.binary_of(label)
        raise ValueError(f"unknown label level {level!r}; expected one of {LEVELS}")


DEFAULT_TAXONOMY = LabelTaxonomy()
