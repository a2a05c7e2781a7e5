"""Exception hierarchy for the platform.

Every error that crosses a module boundary carries a stable machine ``code``
so the API layer and the CLI can map failures without string matching.
"""

from __future__ import annotations


class RboardError(Exception):
    """Base class for all platform errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class NotFound(RboardError):
    code = "not_found"


class DuplicateId(RboardError):
    code = "duplicate_id"


class SchemaViolation(RboardError):
    code = "schema_violation"


class EmptyDataset(RboardError):
    code = "empty_dataset"


class DegenerateClass(RboardError):
    code = "degenerate_class"


class EmptyInteractions(RboardError):
    code = "empty_interactions"


class MissingEntryFile(RboardError):
    code = "missing_entry_file"


class ArchiveTooLarge(RboardError):
    code = "archive_too_large"


class MalformedArchive(RboardError):
    code = "malformed_archive"


class NoDatasetsForTask(RboardError):
    code = "no_datasets_for_task"


class InvalidStateTransition(RboardError):
    code = "invalid_state_transition"


class OutputInvalid(RboardError):
    code = "output_invalid"


class ImmutableRecord(RboardError):
    code = "immutable_record"


class SingleClass(RboardError):
    code = "single_class"


class EmptyInput(RboardError):
    code = "empty_input"


class EmptyRelevant(RboardError):
    code = "empty_relevant"


class IncompleteRanks(RboardError):
    code = "incomplete_ranks"


class Unauthorized(RboardError):
    code = "unauthorized"
