import re

from aioprometheus.collectors import Summary


class Metrics:
    def __init__(self) -> None:
        self._metrics: dict[str, Summary] = {}

    @staticmethod
    def _transform(text: str) -> str:
        """Convert camel/pascal case to snake_case"""
        return re.sub(r"(?<!^)(?=[A-Z])", "_", text).lower()

    def _create(self, name: str, description: str) -> None:
        """Create metric"""
        self._metrics[name] = Summary(name=self._transform(name), doc=description)

    def register(
        self, name: str, description: str | None, labels: dict[str, str] | None = None, value: float = 1
    ) -> None:
        """Register metric event"""
        if labels is None:
            labels = {}
        if name not in self._metrics:
            self._create(name=name, description=description or "")
        self._metrics[name].observe(labels=labels, value=value)

    def register_verdict(self, kind: str, vacuous: bool = False) -> None:
        """Register a per-sequent verdict"""
        labels = {"event_type": "verdict", "verdict": kind, "vacuous": str(vacuous).lower()}
        self.register(name="solver_metrics", description="Entailment solver events", labels=labels)

    def register_profile_size(self, formulas: int, sets: int) -> None:
        """Register the size of a computed profile relation"""
        self.register(name="profile_formulas", description="Core formulas in a profile", value=formulas)
        self.register(name="profile_sets", description="Abstraction sets in a profile", value=sets)

    def register_truncated_canonical(self) -> None:
        """Register a canonical form search cut short by the permutation cap"""
        self.register(name="canonical_truncations", description="Truncated canonical form searches")

    def register_transform(self, stage: str, rules: int) -> None:
        """Register the rule count produced by a transformation stage"""
        labels = {"stage": stage}
        self.register(name="transform_rules", description="Rules after a transform stage", labels=labels, value=rules)


metrics = Metrics()
