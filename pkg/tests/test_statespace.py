import numpy as np
import pytest
from hypothesis import given, strategies as st

from complexity_lab.errors import (
    DivergenceInfiniteError,
    InvalidArgumentError,
    InvalidStateError,
    ParseError,
)
from complexity_lab.statespace import (
    JointDist,
    ProbVector,
    StochMatrix,
    SystemShape,
    decode_state,
    encode_state,
    entropy,
    kl_matrices,
    marginal,
    read_prob_vector,
    read_stoch_matrix,
    write_prob_vector,
    write_stoch_matrix,
)


def random_pv(rng, N):
    return ProbVector(SystemShape(N), rng.dirichlet(np.ones(2**N)))


def random_sm(rng, N):
    return StochMatrix(SystemShape(N), rng.dirichlet(np.ones(2**N), size=2**N))


class TestShape:
    @pytest.mark.parametrize("n", [0, 21, -1])
    def test_rejects_out_of_range(self, n):
        with pytest.raises(InvalidArgumentError):
            SystemShape(n)

    def test_dense_guard(self):
        with pytest.raises(InvalidArgumentError):
            SystemShape(13).require_dense()
        SystemShape(12).require_dense()


class TestEncoding:
    @pytest.mark.parametrize(
        "bits, idx",
        [((-1, -1, -1), 0), ((1, 1, 1), 7), ((1, -1, -1), 1)],
    )
    def test_examples(self, bits, idx):
        assert encode_state(bits) == idx
        assert tuple(decode_state(idx, SystemShape(3))) == bits

    @pytest.mark.parametrize("N", range(1, 11))
    def test_round_trip_all_states(self, N):
        shape = SystemShape(N)
        for i in range(2**N):
            assert encode_state(decode_state(i, shape), shape) == i

    @pytest.mark.parametrize("bad", [(1, 0, 1), (1, 2, -1), (1, 1)])
    def test_invalid(self, bad):
        with pytest.raises(InvalidStateError):
            encode_state(bad, SystemShape(3))

    def test_decode_out_of_range(self):
        with pytest.raises(InvalidStateError):
            decode_state(8, SystemShape(3))


class TestProbabilityTypes:
    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidArgumentError):
            ProbVector(SystemShape(1), [0.5, 0.6])

    def test_rejects_negative(self):
        with pytest.raises(InvalidArgumentError):
            ProbVector(SystemShape(1), [1.5, -0.5])

    def test_renormalizes_within_tolerance(self):
        pv = ProbVector(SystemShape(1), [0.5 + 1e-13, 0.5])
        assert pv.probs.sum() == pytest.approx(1.0, abs=1e-15)

    def test_rows_checked(self):
        with pytest.raises(InvalidArgumentError):
            StochMatrix(SystemShape(1), [[0.5, 0.5], [0.2, 0.2]])

    def test_joint_input_marginal_is_p(self):
        rng = np.random.default_rng(1)
        p, P = random_pv(rng, 3), random_sm(rng, 3)
        j = JointDist.from_pair(p, P)
        assert np.allclose(j.input_marginal, p.probs, atol=1e-15)
        assert j.joint.sum() == pytest.approx(1.0, abs=1e-12)

    def test_immutable(self):
        pv = ProbVector.uniform(SystemShape(2))
        with pytest.raises(ValueError):
            pv.probs[0] = 1.0


class TestEntropy:
    def test_uniform(self):
        assert entropy(ProbVector.uniform(SystemShape(3))) == pytest.approx(3.0, abs=1e-15)

    def test_dirac(self):
        assert entropy(ProbVector.dirac(SystemShape(3), 5)) == 0.0

    def test_dyadic(self):
        assert entropy(ProbVector(SystemShape(2), [0.5, 0.25, 0.25, 0.0])) == pytest.approx(1.5, abs=1e-15)

    @given(st.integers(0, 2**32 - 1), st.floats(0, 1))
    def test_concave(self, seed, lam):
        rng = np.random.default_rng(seed)
        a, b = random_pv(rng, 3), random_pv(rng, 3)
        mix = ProbVector(a.shape, lam * a.probs + (1 - lam) * b.probs)
        assert entropy(mix) >= lam * entropy(a) + (1 - lam) * entropy(b) - 1e-12

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_bounds(self, seed, N):
        p = random_pv(np.random.default_rng(seed), N)
        assert -1e-12 <= entropy(p) <= N + 1e-12


class TestMarginal:
    def test_full_input_is_p(self):
        rng = np.random.default_rng(2)
        p, P = random_pv(rng, 3), random_sm(rng, 3)
        j = JointDist.from_pair(p, P)
        assert np.allclose(marginal(j, [0, 1, 2], []).ravel(), p.probs, atol=1e-15)

    def test_output_of_stationary_is_p(self):
        P = StochMatrix(SystemShape(1), [[0.9, 0.1], [0.5, 0.5]])
        p = ProbVector(SystemShape(1), [5 / 6, 1 / 6])
        j = JointDist.from_pair(p, P)
        assert np.allclose(marginal(j, [], [0]).ravel(), p.probs, atol=1e-15)

    def test_node_pair_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        raw = rng.random((4, 4))
        joint = raw / raw.sum()
        j = JointDist(SystemShape(2), joint)
        expected = np.zeros((2, 2))
        for x in range(4):
            for y in range(4):
                expected[x & 1, y & 1] += joint[x, y]
        assert np.allclose(marginal(j, [0], [0]), expected, atol=1e-15)

    def test_subset_order_follows_bit_convention(self):
        rng = np.random.default_rng(4)
        j = JointDist.from_pair(random_pv(rng, 3), random_sm(rng, 3))
        m = marginal(j, [0, 2], [1])
        expected = np.zeros((4, 2))
        for x in range(8):
            for y in range(8):
                a = (x & 1) | (((x >> 2) & 1) << 1)
                expected[a, (y >> 1) & 1] += j.joint[x, y]
        assert np.allclose(m, expected, atol=1e-15)
        assert m.sum() == pytest.approx(1.0, abs=1e-12)

    def test_empty_subsets(self):
        j = JointDist.from_pair(ProbVector.uniform(SystemShape(2)), StochMatrix.uniform(SystemShape(2)))
        with pytest.raises(InvalidArgumentError):
            marginal(j, [], [])


class TestKL:
    def test_self_is_zero(self):
        rng = np.random.default_rng(5)
        p, P = random_pv(rng, 2), random_sm(rng, 2)
        assert kl_matrices(p, P, P) == pytest.approx(0.0, abs=1e-15)

    def test_one_bit(self):
        s = SystemShape(1)
        p = ProbVector(s, [0.5, 0.5])
        assert kl_matrices(p, StochMatrix.identity(s), StochMatrix.uniform(s)) == pytest.approx(1.0, abs=1e-15)

    def test_zero_mass_rows_ignored(self):
        s = SystemShape(1)
        p = ProbVector(s, [1.0, 0.0])
        P = StochMatrix(s, [[0.3, 0.7], [0.2, 0.8]])
        Q1 = StochMatrix(s, [[0.5, 0.5], [0.5, 0.5]])
        Q2 = StochMatrix(s, [[0.5, 0.5], [1.0, 0.0]])
        assert kl_matrices(p, P, Q1) == kl_matrices(p, P, Q2)

    def test_absolute_continuity(self):
        s = SystemShape(1)
        p = ProbVector(s, [0.5, 0.5])
        with pytest.raises(DivergenceInfiniteError) as info:
            kl_matrices(p, StochMatrix.uniform(s), StochMatrix.identity(s))
        assert (info.value.state, info.value.next_state) == (0, 1)

    @given(st.integers(0, 2**32 - 1))
    def test_gibbs(self, seed):
        rng = np.random.default_rng(seed)
        p, P, Q = random_pv(rng, 2), random_sm(rng, 2), random_sm(rng, 2)
        assert kl_matrices(p, P, Q) >= 0.0


class TestCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(6)
        p, P = random_pv(rng, 2), random_sm(rng, 2)
        write_prob_vector(tmp_path / "p.csv", p)
        write_stoch_matrix(tmp_path / "P.csv", P)
        assert np.array_equal(read_prob_vector(tmp_path / "p.csv").probs, p.probs)
        assert np.array_equal(read_stoch_matrix(tmp_path / "P.csv").rows, P.rows)
        assert (tmp_path / "p.csv").read_text().startswith("# shape N=2")

    def test_parse_error_line(self, tmp_path):
        f = tmp_path / "p.csv"
        f.write_text("# shape N=1\n0.5\nabc\n")
        with pytest.raises(ParseError) as info:
            read_prob_vector(f)
        assert info.value.line == 3
