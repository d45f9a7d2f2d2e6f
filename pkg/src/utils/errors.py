"""
Exception hierarchy for the LIWC bias audit toolkit.
Every pipeline-facing error carries the exit code the CLI reports.
"""


class AuditError(Exception):
    """Base class for errors that end a CLI run with a specific exit code."""

    exit_code = 1

    def __init__(self, message, *, stage=None):
        self.stage = stage
        super().__init__(message)


class InputError(AuditError):
    """Unreadable or malformed input (corpus, dictionary, config, lexicon)."""

    exit_code = 2


class ConfigError(InputError):
    """Invalid run configuration."""


class CorpusFormatError(InputError):
    """Corpus or variants file that does not follow the JSONL/CSV record layout."""


class DictionaryParseError(InputError):
    """Dictionary file error, always tied to a line number."""

    def __init__(self, message, line_number, source=None):
        self.line_number = line_number
        self.detail = message
        self.source = source
        where = f"{source} line {line_number}" if source else f"line {line_number}"
        super().__init__(f"{where}: {message}")


class CredentialError(AuditError):
    """A live provider's credential environment variable is not set."""

    exit_code = 3

    def __init__(self, variable, provider=None):
        self.variable = variable
        self.provider = provider
        who = f" for provider '{provider}'" if provider else ""
        super().__init__(f"Missing credential environment variable {variable}{who}")


class MissingIntermediateError(AuditError):
    """A stage needs an intermediate file that an earlier stage has not produced."""

    exit_code = 4

    def __init__(self, path, stage=None):
        self.path = path
        super().__init__(f"Missing intermediate file: {path}", stage=stage)


# Argument-level errors raised by library code

class EmptyAbstractError(ValueError):
    """Prompt construction was given an empty abstract."""


class CompositeError(ValueError):
    """A composite definition references a category that is not available."""

    def __init__(self, composite, category):
        self.composite = composite
        self.category = category
        super().__init__(f"Composite '{composite}' references unknown category '{category}'")


class ReportError(ValueError):
    """Report inputs whose shape does not match the feature schema."""


__all__ = [
    'AuditError', 'InputError', 'ConfigError', 'CorpusFormatError',
    'DictionaryParseError', 'CredentialError', 'MissingIntermediateError',
    'EmptyAbstractError', 'CompositeError', 'ReportError'
]
