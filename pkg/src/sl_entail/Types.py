from src.formula.terms import Term

Location = int
Store = dict[Term, Location]
Heap = dict[Location, tuple[Location, ...]]
