"""groundlab: train small grounded language models and probe what they learned.

A desk-scale laboratory for the question "what does visual grounding buy a
word learner?": synthesizes grounded corpora, trains text-only and fused
transformer variants on a few million tokens, and evaluates the resulting
word representations against behavioral and neural references.
"""

__version__ = "0.1.0"
