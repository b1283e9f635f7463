import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsfh import f2poly
from bsfh.linear import (
    F2Matrix,
    F2UMatrix,
    GradedChainComplex,
    GradedFUModule,
    GradingError,
    NotAComplexError,
    RING_F2,
    RING_F2U,
    f2_homology,
    f2u_module_homology,
    nullspace,
    snf_over_f2u,
    solve_f2,
)


U = f2poly.umono(1)
U2 = f2poly.umono(2)


def test_poly_basics():
    assert f2poly.pmul(U ^ 1, U ^ 1) == U2 ^ 1  # (U+1)^2 = U^2+1 over F2
    q, r = f2poly.pdivmod(U2 ^ 1, U ^ 1)
    assert q == U ^ 1 and r == 0
    assert f2poly.pgcd(U2, U) == U
    assert f2poly.u_order(U2 ^ U) == 1
    assert f2poly.pstr(U2 ^ 1) == "1+U^2"


@given(st.integers(0, 2**8 - 1), st.integers(1, 2**8 - 1))
def test_poly_divmod_roundtrip(p, q):
    quot, rem = f2poly.pdivmod(p, q)
    assert f2poly.padd(f2poly.pmul(quot, q), rem) == p
    assert f2poly.deg(rem) < f2poly.deg(q)


def test_solve_and_nullspace():
    m = F2Matrix.from_entries([[1, 1, 0], [0, 1, 1]])
    x = solve_f2(m, 0b11)
    assert x is not None and m.apply(x) == 0b11
    assert solve_f2(F2Matrix.from_entries([[1, 1], [1, 1]]), 0b01) is None
    ker = nullspace(m)
    assert len(ker) == 1 and m.apply(ker[0]) == 0


@given(st.lists(st.integers(0, 2**6 - 1), min_size=1, max_size=6))
@settings(max_examples=60)
def test_nullspace_dimension(rows):
    m = F2Matrix(len(rows), 6, rows)
    ker = nullspace(m)
    assert all(m.apply(v) == 0 for v in ker)
    assert len(ker) == 6 - m.rank()


class TestSNF:
    def test_identity(self):
        form = snf_over_f2u(F2UMatrix.identity(3))
        assert form.factors == (1, 1, 1)

    def test_single_u_squared(self):
        m = F2UMatrix(1, 1, [[U2]])
        assert snf_over_f2u(m).factors == (U2,)

    def test_upper_triangular_pair(self):
        # [[U, 1], [0, U]]: hand row-reduction gives factors 1, U^2
        # (re-multiplying the transforms is checked inside snf_over_f2u).
        m = F2UMatrix(2, 2, [[U, 1], [0, U]])
        assert snf_over_f2u(m).factors == (1, U2)

    def test_divisibility_chain(self):
        m = F2UMatrix(2, 2, [[U, 0], [0, U ^ 1]])
        factors = snf_over_f2u(m).factors
        assert len(factors) == 2
        assert f2poly.divides(factors[0], factors[1])

    @given(
        st.lists(
            st.lists(st.integers(0, 2**4 - 1), min_size=3, max_size=3),
            min_size=2,
            max_size=4,
        )
    )
    @settings(max_examples=40)
    def test_random_recomposition(self, rows):
        # snf_over_f2u raises internally if P*A*Q != D or the tracked
        # inverses fail, so constructing the form is itself the check.
        form = snf_over_f2u(F2UMatrix(len(rows), 3, rows))
        for a, b in zip(form.factors, form.factors[1:]):
            assert f2poly.divides(a, b)


class TestF2Homology:
    def test_zero_differential_three_generators(self):
        c = GradedChainComplex(
            RING_F2,
            ("x", "y", "z"),
            (0, 0, 2),
            (0, 1, 0),
            F2Matrix(3, 3),
        )
        assert f2_homology(c).total_rank() == 3

    def test_acyclic_pair(self):
        d = F2Matrix(2, 2)
        d.set_entry(1, 0, 1)  # dx = y
        c = GradedChainComplex(RING_F2, ("x", "y"), (0, 0), (0, 1), d)
        assert f2_homology(c).total_rank() == 0

    def test_not_a_complex(self):
        d = F2Matrix.from_entries([[0, 1], [1, 0]])
        with pytest.raises(NotAComplexError):
            GradedChainComplex(RING_F2, ("x", "y"), (0, 0), (0, 1), d)

    def test_grading_violation(self):
        d = F2Matrix(2, 2)
        d.set_entry(1, 0, 1)
        with pytest.raises(GradingError):
            GradedChainComplex(RING_F2, ("x", "y"), (0, 2), (0, 1), d)
        with pytest.raises(GradingError):
            GradedChainComplex(RING_F2, ("x", "y"), (0, 0), (0, 0), d)

    def test_left_handed_trefoil_hat_ranks(self):
        # Hat complex of the left-handed trefoil: three generators, no
        # differential, ranks 1,1,1 at Alexander -1, 0, 1 (brute-force
        # row reduction of the zero matrix).
        c = GradedChainComplex(
            RING_F2,
            ("a", "b", "c"),
            (-2, 0, 2),
            (0, 1, 0),
            F2Matrix(3, 3),
        )
        h = f2_homology(c)
        assert h.rank_at(-2) == 1 and h.rank_at(0) == 1 and h.rank_at(2) == 1


class TestF2UHomology:
    def test_single_free_generator(self):
        c = GradedChainComplex(RING_F2U, ("x",), (0,), (0,), F2UMatrix(1, 1))
        h = f2u_module_homology(c)
        assert h.towers == ((0, 0, 1),) and not h.torsion

    def test_dx_equals_uy(self):
        # dx = U y: one torsion summand of order 1, no free part there.
        d = F2UMatrix(2, 2)
        d.data[1][0] = U
        c = GradedChainComplex(RING_F2U, ("x", "y"), (0, 2), (0, 1), d)
        h = f2u_module_homology(c)
        assert h.free_rank() == 0
        assert h.torsion_orders() == [1]
        assert h.torsion[0][0] == 2  # the quotient class sits at y's grading

    def test_empty_complex(self):
        c = GradedChainComplex(RING_F2U, (), (), (), F2UMatrix(0, 0))
        assert f2u_module_homology(c).is_zero()

    def test_order_two_torsion(self):
        d = F2UMatrix(2, 2)
        d.data[1][0] = U2
        c = GradedChainComplex(RING_F2U, ("x", "y"), (0, 4), (0, 1), d)
        h = f2u_module_homology(c)
        assert h.torsion_orders() == [2]
        assert h.free_rank() == 0

    def test_trefoil_minus_pattern(self):
        # da = U b, c free: F[U] tower at top A=1 plus order-1 torsion at A=0.
        d = F2UMatrix(3, 3)
        d.data[1][0] = U
        c = GradedChainComplex(
            RING_F2U, ("a", "b", "c"), (-2, 0, 2), (0, 1, 0), d
        )
        h = f2u_module_homology(c)
        assert h.towers == ((2, 0, 1),)
        assert h.torsion == ((0, 1, 1, 1),)

    def test_u_zero_cross_oracle(self):
        # Setting U = 0 in an F2[U] complex must reproduce f2_homology
        # ranks at each grading present among the generators.
        d = F2UMatrix(3, 3)
        d.data[1][0] = U
        cu = GradedChainComplex(
            RING_F2U, ("a", "b", "c"), (-2, 0, 2), (0, 1, 0), d
        )
        c0 = GradedChainComplex(
            RING_F2, ("a", "b", "c"), (-2, 0, 2), (0, 1, 0), d.specialize(0)
        )
        h0 = f2_homology(c0)
        assert h0.total_rank() == 3
        hu = f2u_module_homology(cu)
        # U = 0 of (F[U] tower + F[U]/U) has one class at each grading.
        assert hu.rank_at_alexander(2) == 1 and hu.rank_at_alexander(0) >= 1


def test_graded_fu_module_str():
    m = GradedFUModule.build([(0, 0)], [(2, 1, 3)])
    assert "F[U]" in str(m) and "U^3" in str(m)
