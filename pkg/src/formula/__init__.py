from .atoms import Atom, Context, Diseq, Emp, Eq, PointsTo, Pred
from .core import EMP, CoreAtom, CoreFormula, VariablePool, canonicalize, emp_context, is_core, roots_of
from .heaps import SID, Problem, Rule, Sequent, SymbolicHeap
from .measure import ProblemMetrics, problem_metrics
from .terms import FreshNames, Term, const, var
