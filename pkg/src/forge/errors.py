"""Error taxonomy shared by all forge modules.

Every domain error derives from ForgeError; the class name is the stable
error name surfaced on the CLI (stderr) and in HTTP error bodies.
"""


class ForgeError(Exception):
    @property
    def name(self) -> str:
        return type(self).__name__


# component bus
class DuplicateActualName(ForgeError):
    pass


class UnknownName(ForgeError):
    pass


class DependencyCycle(ForgeError):
    pass


class FactoryFailure(ForgeError):
    pass


class DisconnectedComponent(ForgeError):
    pass


class NotConnected(ForgeError):
    pass


class ContractMismatch(ForgeError):
    pass


class UnknownParam(ForgeError):
    pass


class TypeMismatch(ForgeError):
    pass


class OutOfRange(ForgeError):
    pass


# job model
class UnknownTemplate(ForgeError):
    pass


class InvalidOverride(ForgeError):
    pass


class UnknownJob(ForgeError):
    pass


class JobActive(ForgeError):
    pass


class IllegalTransition(ForgeError):
    pass


class UnknownHandler(ForgeError):
    pass


class InvalidWorkflow(ForgeError):
    pass


# registry
class CorruptStore(ForgeError):
    def __init__(self, path, reason):
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


# backends
class BackendUnavailable(ForgeError):
    pass


class MatchFailure(ForgeError):
    pass


class UnknownTicket(ForgeError):
    pass


class AlreadyTerminal(ForgeError):
    pass


class MissingOutput(ForgeError):
    pass


class UnresolvedLogicalName(ForgeError):
    pass


class SourceMissing(ForgeError):
    pass


class StoreUnreachable(ForgeError):
    pass


class UnsupportedDialect(ForgeError):
    pass


# split/merge
class NoInputFiles(ForgeError):
    pass


class ScriptFailure(ForgeError):
    def __init__(self, exit_code, stderr=""):
        super().__init__(f"splitter exited {exit_code}: {stderr.strip()}")
        self.exit_code = exit_code
        self.stderr = stderr


class InvalidPlan(ForgeError):
    pass


class BinningMismatch(ForgeError):
    pass


class EmptyInput(ForgeError):
    pass


class SchemaMismatch(ForgeError):
    pass


class SubjobsActive(ForgeError):
    pass


# options editor
class ParseError(ForgeError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidSpec(ForgeError):
    def __init__(self, owner, name, reason):
        super().__init__(f"{owner + '.' if owner else ''}{name}: {reason}")
        self.owner = owner
        self.option = name
        self.reason = reason


class UnknownOption(ForgeError):
    pass


class NotAChoice(ForgeError):
    pass
