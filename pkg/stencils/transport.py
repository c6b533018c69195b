"""
Point-to-point messages between ranks, and an in-process loopback world that
runs every rank as a thread.

Wire format (little endian): a 20-byte header

    magic u32 | sweep u32 | phase u8 | side u8 | depth u16 | payload_len u64

followed by ``payload_len`` bytes of float64 values, x fastest.
"""

import logging
import queue
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .conf import get_setting
from .exceptions import ConfigurationError, PeerShutdown, ProtocolError, RankFailure

logger = logging.getLogger(__name__)

MAGIC = 0x53464847
HEADER_DTYPE = np.dtype([
    ('magic', '<u4'),
    ('sweep', '<u4'),
    ('phase', 'u1'),
    ('side', 'u1'),
    ('depth', '<u2'),
    ('payload_len', '<u8'),
])
PAYLOAD_DTYPE = np.dtype('<f8')

PHASE_CODES = {'x': 0, 'y': 1, 'z': 2}
LOW, HIGH = 0, 1


@dataclass(frozen=True)
class Header:
    sweep: int
    phase: int
    side: int
    depth: int
    payload_len: int

    def encode(self):
        record = np.zeros((), dtype=HEADER_DTYPE)
        record['magic'] = MAGIC
        record['sweep'] = self.sweep
        record['phase'] = self.phase
        record['side'] = self.side
        record['depth'] = self.depth
        record['payload_len'] = self.payload_len
        return record.tobytes()

    @classmethod
    def decode(cls, data):
        if len(data) < HEADER_DTYPE.itemsize:
            raise ProtocolError(f'short header: {len(data)} bytes')
        record = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
        if int(record['magic']) != MAGIC:
            raise ProtocolError(f'bad magic {int(record["magic"]):#x}')
        return cls(
            int(record['sweep']), int(record['phase']), int(record['side']),
            int(record['depth']), int(record['payload_len']),
        )


@dataclass(frozen=True)
class Message:
    header: Header
    payload: bytes

    @classmethod
    def from_values(cls, sweep, phase, side, depth, values):
        payload = np.ascontiguousarray(values, dtype=PAYLOAD_DTYPE).tobytes()
        return cls(Header(sweep, phase, side, depth, len(payload)), payload)

    def encode(self):
        return self.header.encode() + self.payload

    @classmethod
    def decode(cls, data):
        header = Header.decode(data)
        payload = data[HEADER_DTYPE.itemsize:]
        if len(payload) != header.payload_len:
            raise ProtocolError(f'payload is {len(payload)} bytes, header says {header.payload_len}')
        return cls(header, payload)

    def values(self):
        return np.frombuffer(self.payload, dtype=PAYLOAD_DTYPE).copy()


class LoopbackWorld:
    """Unbounded FIFO channels between every ordered pair of ranks."""

    def __init__(self, ranks, recv_timeout=None):
        if ranks < 1:
            raise ConfigurationError(f'a world needs at least one rank, got {ranks}')
        self.ranks = ranks
        self.recv_timeout = recv_timeout or get_setting('RECV_TIMEOUT')
        self.abort = threading.Event()
        self._channels = {
            (src, dst): queue.SimpleQueue() for src in range(ranks) for dst in range(ranks)
        }

    def channel(self, src, dst):
        return self._channels[(src, dst)]

    def endpoint(self, rank, neighbors=None):
        return Endpoint(self, rank, neighbors)


class Endpoint:
    def __init__(self, world, rank, neighbors=None):
        self.world = world
        self.rank = rank
        self.neighbors = None if neighbors is None else set(neighbors)
        self.sent = 0
        self.received = 0

    def _check_peer(self, peer):
        if not 0 <= peer < self.world.ranks:
            raise ConfigurationError(f'rank {self.rank}: no rank {peer}')
        if self.neighbors is not None and peer not in self.neighbors:
            raise ConfigurationError(f'rank {self.rank}: {peer} is not a declared neighbour')

    def send(self, peer, message):
        self._check_peer(peer)
        if self.world.abort.is_set():
            raise PeerShutdown(f'rank {self.rank}: world aborted before send to {peer}')
        self.world.channel(self.rank, peer).put(message.encode())
        self.sent += 1

    def recv(self, peer, sweep=None, phase=None, side=None, depth=None, count=None):
        """Block for the next message from ``peer`` and check it against the expected header."""
        self._check_peer(peer)
        channel = self.world.channel(peer, self.rank)
        while True:
            try:
                data = channel.get(timeout=self.world.recv_timeout)
                break
            except queue.Empty:
                if self.world.abort.is_set():
                    raise PeerShutdown(f'rank {self.rank}: world aborted while waiting on {peer}')
        message = Message.decode(data)
        expected = {'sweep': sweep, 'phase': phase, 'side': side, 'depth': depth}
        for name, value in expected.items():
            got = getattr(message.header, name)
            if value is not None and got != value:
                raise ProtocolError(
                    f'rank {self.rank} from {peer}: header {name}={got}, expected {value}'
                )
        if count is not None and message.header.payload_len != count * PAYLOAD_DTYPE.itemsize:
            raise ProtocolError(
                f'rank {self.rank} from {peer}: {message.header.payload_len} bytes, expected {count} values'
            )
        self.received += 1
        return message.values()


def send(endpoint, peer, message):
    endpoint.send(peer, message)


def recv(endpoint, peer, **expected):
    return endpoint.recv(peer, **expected)


def spawn_world(ranks, program, recv_timeout=None, neighbors=None):
    """
    Run ``program(endpoint)`` for every rank concurrently and return the
    results in rank order. ``neighbors`` optionally maps rank -> peers.
    """
    world = LoopbackWorld(ranks, recv_timeout)

    def run(rank):
        endpoint = world.endpoint(rank, None if neighbors is None else neighbors(rank))
        try:
            return program(endpoint)
        except BaseException:
            world.abort.set()
            raise

    with ThreadPoolExecutor(max_workers=ranks, thread_name_prefix='rank') as pool:
        futures = [pool.submit(run, rank) for rank in range(ranks)]
        errors = [f.exception() for f in futures]

    failed = [(rank, exc) for rank, exc in enumerate(errors) if exc is not None]
    if failed:
        # ranks that only saw the shutdown are not the cause
        primary = [(r, e) for r, e in failed if not isinstance(e, PeerShutdown)] or failed
        rank, exc = primary[0]
        for r, e in failed:
            logger.error('rank %d failed: %r', r, e)
        raise RankFailure(rank, repr(exc)) from exc
    return [f.result() for f in futures]
