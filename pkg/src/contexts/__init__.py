from .rules import ContextHead, ContextRule, ContextSystem, context_rules_for
from .unfold import CoreUnfolding, core_unfoldings, head_of
