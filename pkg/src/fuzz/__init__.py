from .generator import DifferentialReport, Shape, differential, random_problem
