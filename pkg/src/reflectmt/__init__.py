"""reflectmt: self-reflective two-stage LLM translation toolkit.

Builds the multitask fine-tuning datasets (basic translation, translate-and-
assess, draft refinement), drives the draft -> assess -> refine inference loop
against any chat-completion endpoint, and evaluates the results.
"""

__version__ = "0.1.0"
