"""Cameron-Liebler line classes of PG(3,q) with parameter (q²+1)/2.

Builds the Bruen-Drudge class, its perturbed variant and the derived classes obtained
from tangent lines of a pencil of elliptic quadrics, and verifies them exhaustively.
"""

__version__ = "0.1.0"
