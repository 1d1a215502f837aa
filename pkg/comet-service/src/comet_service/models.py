"""Quality model loading.

Two backends: the real COMET checkpoint (needs the optional unbabel-comet
dependency) and a deterministic stub for CI. Both expose
predict(items) -> list[float] where items are (src, mt, ref) dicts.
"""

from __future__ import annotations

import difflib
import os

DEFAULT_CHECKPOINT = "Unbabel/wmt22-comet-da"
CHECKPOINT_ENV = "COMET_CHECKPOINT"


class StubModel:
    """Deterministic stand-in: similarity of the hypothesis to the reference."""

    name = "stub"

    def predict(self, items: list[dict]) -> list[float]:
        return [
            difflib.SequenceMatcher(None, item["mt"], item["ref"]).ratio()
            for item in items
        ]


class CometModel:
    """Thin wrapper over a COMET checkpoint, eval mode, CPU unless configured."""

    def __init__(self, checkpoint: str):
        try:
            from comet import download_model, load_from_checkpoint
        except ImportError as exc:  # pragma: no cover - optional dependency
            raise RuntimeError(
                f"checkpoint {checkpoint!r} needs the 'comet' extra "
                "(pip install 'comet-service[comet]')"
            ) from exc
        self.name = checkpoint
        self._model = load_from_checkpoint(download_model(checkpoint))
        self._model.eval()
        self._gpus = int(os.environ.get("COMET_GPUS", "0"))
        self._batch_size = int(os.environ.get("COMET_BATCH_SIZE", "16"))

    def predict(self, items: list[dict]) -> list[float]:  # pragma: no cover
        output = self._model.predict(
            items, batch_size=self._batch_size, gpus=self._gpus, progress_bar=False
        )
        return [float(s) for s in output.scores]


def load_model(checkpoint: str | None = None):
    checkpoint = checkpoint or os.environ.get(CHECKPOINT_ENV, DEFAULT_CHECKPOINT)
    if checkpoint == "stub":
        return StubModel()
    return CometModel(checkpoint)
