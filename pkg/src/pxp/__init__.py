"""Local explainable phishing-warning engine.

Turns a flagged page (URL + rendered HTML) into a warning a person can act
on: which on-page elements look like phishing, why, and an annotated
screenshot showing where they are. Explanations are constrained to a fixed
feature catalog so output stays predictable across runs of a small local
language model.
"""

__version__ = "0.1.0"
