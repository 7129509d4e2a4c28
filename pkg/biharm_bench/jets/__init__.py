from .jet import ORDER, Jet, cos, exp, expi, get_basis, sin, sqrt
from .oracle import derivative, fd_derivative
