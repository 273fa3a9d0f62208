from .parser import parse_problem
from .printer import render_core, render_heap, render_problem
