from .abstraction import core_abstraction
from .check import Countermodel, OracleVerdict, OracleVerdictKind, oracle_check, oracle_problem
from .enumeration import Model, ModelFilter, enumerate_models, models
from .semantics import Matcher, is_normal_model, sat_core_formula, sat_symbolic_heap, witnesses
from .structures import Bounds, Structure, canonical_structure
