"""Exception types shared across the engine.

Every error carries a stable ``code`` string so the HTTP service can emit
machine-readable error envelopes without mapping tables drifting apart.
"""

from __future__ import annotations


class AdaptestError(Exception):
    """Base class for all engine errors."""

    code = "internal_error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.__doc__ or self.code)
        self.message = message or self.__doc__ or self.code


# -- data model ------------------------------------------------------------

class MalformedRow(AdaptestError):
    """A data file row does not match the documented schema."""

    code = "malformed_row"

    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no


class UnknownItemId(AdaptestError):
    """A response references an item that is not in the item bank."""

    code = "unknown_item_id"


class DuplicateRespondent(AdaptestError):
    """The same respondent/item combination appears more than once."""

    code = "duplicate_respondent"


class IncompleteRecord(AdaptestError):
    """A respondent is missing responses for one or more bank items."""

    code = "incomplete_record"


class TooFewRespondents(AdaptestError):
    """Not enough respondents to build the requested folds."""

    code = "too_few_respondents"


# -- embeddings ------------------------------------------------------------

class EmptyCorpus(AdaptestError):
    """The training corpus contains no documents."""

    code = "empty_corpus"


class RankTooLarge(AdaptestError):
    """Requested factorization rank exceeds the matrix dimensions."""

    code = "rank_too_large"


class DegenerateInput(AdaptestError):
    """Input has zero variance; no principal directions exist."""

    code = "degenerate_input"


class AllWordsOutOfVocabulary(AdaptestError):
    """Every word in the response is outside the embedding vocabulary."""

    code = "all_words_oov"


# -- item scoring ----------------------------------------------------------

class SingularSystem(AdaptestError):
    """Unregularized least squares on a rank-deficient design."""

    code = "singular_system"


class InsufficientData(AdaptestError):
    """An item has too few responses to fit its model."""

    code = "insufficient_data"

    def __init__(self, item_id: int, detail: str = ""):
        super().__init__(f"item {item_id}: {detail or 'not enough responses'}")
        self.item_id = item_id


class SetMismatch(AdaptestError):
    """A subset-keyed model was applied to a different item set."""

    code = "set_mismatch"


# -- polytomization --------------------------------------------------------

class KTooLargeForData(AdaptestError):
    """Fewer predictions than requested threshold levels."""

    code = "k_too_large"


# -- graded-response model -------------------------------------------------

class UnobservedCategory(AdaptestError):
    """Some (item, level) pair never occurs in the training data."""

    code = "unobserved_category"

    def __init__(self, missing: dict[int, list[int]]):
        pairs = "; ".join(
            f"item {j}: levels {levels}" for j, levels in sorted(missing.items())
        )
        super().__init__(
            f"unobserved categories ({pairs}); collapse adjacent levels or lower K"
        )
        self.missing = missing


# -- strategies ------------------------------------------------------------

class PowersetTooLarge(AdaptestError):
    """Too many items for exhaustive subset model training."""

    code = "powerset_too_large"


class NoItemsRemaining(AdaptestError):
    """Selection requested but every item has been administered."""

    code = "no_items_remaining"


class ItemAlreadyAdministered(AdaptestError):
    """The submitted item was already administered in this session."""

    code = "item_already_administered"


class EmptySession(AdaptestError):
    """A score was requested before any item was administered."""

    code = "empty_session"


class DegenerateTree(AdaptestError):
    """No valid split exists and no fallback ordering was provided."""

    code = "degenerate_tree"


# -- evaluation ------------------------------------------------------------

class ZeroVariance(AdaptestError):
    """Correlation is undefined for a constant vector."""

    code = "zero_variance"


class SingularCorrelation(AdaptestError):
    """The item correlation matrix is not invertible."""

    code = "singular_correlation"


# -- service ---------------------------------------------------------------

class UnknownStrategy(AdaptestError):
    """Requested strategy or scoring is not available in the bundle."""

    code = "unknown_strategy"


class BundleNotLoaded(AdaptestError):
    """No model bundle has been loaded into the service."""

    code = "bundle_not_loaded"


class SessionNotFound(AdaptestError):
    """No live session with that id."""

    code = "session_not_found"


class WrongItem(AdaptestError):
    """The submitted item does not match the pending question."""

    code = "wrong_item"


class SessionFinished(AdaptestError):
    """The session has already administered its final item."""

    code = "session_finished"
