class StencilError(Exception):
    """Base class for every error raised by the stencil engine."""


class ConfigurationError(StencilError, ValueError):
    pass


class ScheduleError(ConfigurationError):
    pass


class GridAccessError(StencilError, IndexError):
    pass


class ProtocolError(StencilError):
    pass


class PeerShutdown(StencilError):
    pass


class DeadlockError(StencilError):
    pass


class RankFailure(StencilError):
    def __init__(self, rank, message):
        super().__init__(f'rank {rank}: {message}')
        self.rank = rank
