"""Run configuration and the frozen slack-constant table.

The table is plain text, one ``name = integer`` per line, ``#`` comments
allowed.  A ``machine = <version>`` line ties it to the machine it was
measured on.  Only ``aitlab calibrate`` rewrites it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path


class ConfigError(ValueError):
    pass


DEFAULT_SLACK_PATH = Path(str(resources.files("aitlab") / "data" / "slack.txt"))

# name -> what the constant bounds (kept in the file as a comment)
SLACK_NAMES = {
    "c_machine": "k_hat(x) <= -log m_hat(x) + c",
    "c_chain": "k_hat(<x,y>) <= k_hat(x) + k_hat(y) + c",
    "c_mutual": "|I(x:y) - I(y:x)| and I(x:x) - k_hat(x) within c",
    "c_nongrowth": "info(g(x)) <= info(x) + k_hat(p_g) + c",
    "c_lemma6": "log2 of the smallest scale with m(A) A <= c mu",
    "c1": "hg <= hv + c1",
    "c2": "hg <= hc + c2",
    "c3": "hc <= hv + c3 log(hv + 2) + c4 (scale)",
    "c4": "hc <= hv + c3 log(hv + 2) + c4 (offset)",
    "c5": "classical - mixed <= c5 log(mixed + 2) + c6 (scale)",
    "c6": "classical - mixed <= c5 log(mixed + 2) + c6 (offset)",
    "c_transform": "state info of V psi <= info of psi + k_hat(V) + c",
    "c_exotic": "halting-information proxy at or above which a state is flagged",
    "c_stoch_scale": "stochasticity bound log-slack scale",
    "c_stoch": "stochasticity bound log-slack offset",
    "c_border_scale": "border-string bound log-slack scale",
    "c_border": "border-string bound log-slack offset",
    "c_prefix": "Ks_linear(x) <= info(x; H) + c (diagnostic)",
}


@dataclass(frozen=True)
class SlackTable:
    machine: str
    values: dict[str, int]

    def __getitem__(self, name: str) -> int:
        try:
            return self.values[name]
        except KeyError:
            raise ConfigError(f"slack constant {name!r} missing; run calibrate") from None

    def to_text(self) -> str:
        lines = ["# frozen slack constants, regenerated by `aitlab calibrate`", f"machine = {self.machine}"]
        for name in SLACK_NAMES:
            if name in self.values:
                lines.append(f"# {SLACK_NAMES[name]}")
                lines.append(f"{name} = {self.values[name]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SlackTable":
        machine = None
        values: dict[str, int] = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            name, sep, value = (part.strip() for part in line.partition("="))
            if not sep or not name:
                raise ConfigError(f"line {n}: expected 'name = value'")
            if name == "machine":
                machine = value
                continue
            try:
                values[name] = int(value)
            except ValueError:
                raise ConfigError(f"line {n}: {name} is not an integer") from None
        if machine is None:
            raise ConfigError("slack table has no machine line")
        return cls(machine, values)


def load_slack(path: Path | str | None = None, machine_version: str | None = None) -> SlackTable:
    path = Path(path) if path is not None else DEFAULT_SLACK_PATH
    if not path.exists():
        raise ConfigError(f"slack table {path} not found; run calibrate")
    table = SlackTable.from_text(path.read_text())
    if machine_version is not None and table.machine != machine_version:
        raise ConfigError(f"slack table was measured on {table.machine}, not {machine_version}")
    return table


@dataclass(frozen=True)
class RunConfig:
    """Budgets, population sizes and paths for one lab run."""

    lmax: int = 14
    steps: int = 10_000
    stats_lmax: int = 20
    qubits: int = 2
    catalog_seed: int = 7
    catalog_random: int = 10
    entropy_random: int = 100
    entropy_approx: int = 90
    gap_random: int = 80
    signature_states: int = 16
    instance_seed: int = 3
    population_seed: int = 0
    workers: int = 1
    seed: int = 0  # Monte-Carlo oracles only
    slack_path: str | None = None
    out: str = "out"

    def __post_init__(self):
        if min(self.lmax, self.steps, self.stats_lmax) < 1:
            raise ConfigError("budgets must be positive")
        if self.qubits < 1:
            raise ConfigError("need at least one qubit")
        if self.workers < 1:
            raise ConfigError("need at least one worker")

    def content_hash(self) -> str:
        """Hash of the settings that influence results (not workers or paths)."""
        d = asdict(self)
        for k in ("workers", "out", "slack_path"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def slack(self, machine_version: str | None = None) -> SlackTable:
        return load_slack(self.slack_path, machine_version)
