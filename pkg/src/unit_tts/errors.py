"""Exception types shared across the pipeline.

The CLI maps these to exit codes: PipelineError and subclasses (other than
NumericalError) exit 3, NumericalError exits 4.
"""


class PipelineError(Exception):
    """Base class for precondition and artifact failures."""


class ManifestError(PipelineError):
    """Malformed or inconsistent dataset manifest."""


class AudioIOError(PipelineError):
    """Unreadable or unsupported audio file."""


class SpecError(PipelineError):
    """Invalid synthetic language or speaker specification."""


class VocabularyError(PipelineError):
    """Text cannot be encoded under the current vocabulary/lexicon."""


class FeatureError(PipelineError):
    """Feature extraction precondition violated."""


class CodebookError(PipelineError):
    """Codebook training/quantization precondition violated."""


class AlignmentError(PipelineError):
    """Forced-alignment precondition violated."""


class TrainingError(PipelineError):
    """Model training precondition violated."""


class NumericalError(TrainingError):
    """Non-finite loss or gradient during training."""


class ArtifactError(PipelineError):
    """Missing or stale pipeline artifact."""
