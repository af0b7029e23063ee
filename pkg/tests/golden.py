"""Reference data shared by the unit tests and the acceptance runner.

Decidability table: each row pairs an implication that is not provable
from nothing (left) with the corresponding inference, which holds (right).
Ψ is written P and Φ is written Q.
"""

DECIDABILITY_ROWS = [
    ("|-{Bot} P => (Q => P)",
     "P |-{Bot} (Q |-{Bot} P)"),
    ("|-{Bot} (Q => P) => (Q => (Q => P))",
     "(Q => P) |-{Bot} (Q => (Q => P))"),
    ("|-{Bot} Q => (P \\/ ~P)",
     "Q |-{Bot} (P \\/ ~P)"),
    ("|-{Bot} (~P /\\ (P \\/ Q)) => Q",
     "~P /\\ (P \\/ Q) |-{Bot} Q"),
    ("|-{Bot} (P /\\ (P \\/ Q)) => P",
     "P /\\ (P \\/ Q) |-{Bot} P"),
    ("|-{Bot} (P \\/ (P /\\ Q)) => P",
     "P \\/ (P /\\ Q) |-{Bot} P"),
    ("|-{Bot} (Q /\\ ~Q) => P",
     "(Q /\\ ~Q) \\/ P |-{Bot} P"),
]

# (sequent, expected)
EDGE_CASES = [
    ("Q |-{Bot} P \\/ ~P", True),
    ("|-{Bot} Q => (P \\/ ~P)", False),
    ("P |-{Bot} P \\/ Q", False),
]

# Equivalence each diagonal certificate ends at, written with reify{T} for
# ⌈·⌉ and abstract{T} for ⌊·⌋.  Curry and Russell are stated without the
# outer quotation; see the decisions ledger.
CERTIFICATE_ENDINGS = {
    "liar": "LiarProposition <=> ~abstract{T}(reify{T}(LiarProposition))",
    "russell": "Russell <=> (|-{T} ~abstract{T}(reify{T}(Russell)))",
    "curry": "Curry <=> (Curry |-{T} P)",
    "kleenerosser": "KleeneRosser <=> ~abstract{T}(reify{T}(KleeneRosser))",
    "uninferable": "Uninferable <=> ~(|-{T} Uninferable)",
}

# Functions whose fixed point is replayed line by line, beside the
# sentence diagonalizers.
FIX_FUNCTIONS = [
    "fun(r) fun(n) if Eq(n, 0) then 1 else n * r(n - 1)",
    "fun(g) fun(x) g(x) ?| x",
]
