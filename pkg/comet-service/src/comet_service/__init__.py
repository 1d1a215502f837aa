"""HTTP microservice wrapping a reference-based sentence-level quality model.

POST /score takes {"items":[{"src","mt","ref"},...]} and returns one [0, 1]
score per item, in order. GET /health reports readiness and the loaded
checkpoint. The checkpoint is chosen by the COMET_CHECKPOINT environment
variable; the value "stub" loads a tiny deterministic stand-in so CI and the
client test suite run without the neural runtime.
"""

__version__ = "0.1.0"
