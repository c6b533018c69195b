import numpy as np
from django.test import SimpleTestCase

from stencils.exceptions import ConfigurationError, PeerShutdown, ProtocolError, RankFailure
from stencils.transport import (
    HEADER_DTYPE, HIGH, LOW, MAGIC, Header, LoopbackWorld, Message, recv, send, spawn_world,
)


class HeaderTests(SimpleTestCase):
    def test_layout_is_twenty_little_endian_bytes(self):
        data = Header(sweep=3, phase=1, side=HIGH, depth=4, payload_len=64).encode()
        self.assertEqual(len(data), 20)
        self.assertEqual(HEADER_DTYPE.itemsize, 20)
        self.assertEqual(data[:4], MAGIC.to_bytes(4, 'little'))
        self.assertEqual(data[8:10], bytes([1, HIGH]))
        self.assertEqual(data[12:], (64).to_bytes(8, 'little'))

    def test_decode_checks_magic_and_length(self):
        data = bytearray(Header(0, 0, LOW, 1, 0).encode())
        self.assertEqual(Header.decode(bytes(data)), Header(0, 0, LOW, 1, 0))
        with self.assertRaises(ProtocolError):
            Header.decode(bytes(data[:10]))
        data[0] ^= 0xFF
        with self.assertRaises(ProtocolError):
            Header.decode(bytes(data))

    def test_payload_length_must_match(self):
        message = Message.from_values(1, 2, LOW, 1, np.arange(3.0))
        self.assertEqual(message.header.payload_len, 24)
        with self.assertRaises(ProtocolError):
            Message.decode(message.encode()[:-8])


class LoopbackTests(SimpleTestCase):
    def test_messages_arrive_in_order(self):
        world = LoopbackWorld(2, recv_timeout=0.01)
        a, b = world.endpoint(0), world.endpoint(1)
        for sweep in range(3):
            send(a, 1, Message.from_values(sweep, 0, HIGH, 1, [float(sweep)]))
        for sweep in range(3):
            values = recv(b, 0, sweep=sweep, phase=0, side=HIGH, depth=1, count=1)
            self.assertEqual(list(values), [float(sweep)])
        self.assertEqual((a.sent, b.received), (3, 3))

    def test_unexpected_header_is_a_protocol_error(self):
        world = LoopbackWorld(2, recv_timeout=0.01)
        world.endpoint(0).send(1, Message.from_values(0, 1, LOW, 2, np.zeros(4)))
        with self.assertRaises(ProtocolError):
            world.endpoint(1).recv(0, phase=2)

    def test_wrong_value_count(self):
        world = LoopbackWorld(2, recv_timeout=0.01)
        world.endpoint(0).send(1, Message.from_values(0, 1, LOW, 2, np.zeros(4)))
        with self.assertRaises(ProtocolError):
            world.endpoint(1).recv(0, count=5)

    def test_only_declared_neighbours(self):
        world = LoopbackWorld(3, recv_timeout=0.01)
        endpoint = world.endpoint(0, neighbors={1})
        with self.assertRaises(ConfigurationError):
            endpoint.send(2, Message.from_values(0, 0, LOW, 1, [0.0]))
        with self.assertRaises(ConfigurationError):
            endpoint.send(3, Message.from_values(0, 0, LOW, 1, [0.0]))

    def test_abort_wakes_a_waiting_receiver(self):
        world = LoopbackWorld(2, recv_timeout=0.01)
        world.abort.set()
        with self.assertRaises(PeerShutdown):
            world.endpoint(1).recv(0)


class SpawnWorldTests(SimpleTestCase):
    def test_results_come_back_in_rank_order(self):
        def ring(endpoint):
            right = (endpoint.rank + 1) % 4
            left = (endpoint.rank - 1) % 4
            endpoint.send(right, Message.from_values(0, 0, HIGH, 1, [endpoint.rank]))
            return int(endpoint.recv(left, side=HIGH)[0])

        self.assertEqual(spawn_world(4, ring), [3, 0, 1, 2])

    def test_failing_rank_is_reported_not_its_waiting_peers(self):
        def program(endpoint):
            if endpoint.rank == 2:
                raise ValueError('bad slab')
            return endpoint.recv(2)

        with self.assertRaises(RankFailure) as caught:
            spawn_world(3, program, recv_timeout=0.01)
        self.assertEqual(caught.exception.rank, 2)
        self.assertIsInstance(caught.exception.__cause__, ValueError)
