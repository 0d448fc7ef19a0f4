"""Graded algebras: builders, validation, JSON round trips, disguise."""

from fractions import Fraction

import numpy as np
import pytest

from steenweb.builders import (
    _random_invertible_mod_p,
    build_connected_sum_m6,
    build_cp,
    build_hp,
    build_product,
    build_sphere,
    build_truncated_poly,
    change_basis_mod_p,
    ring_from_json,
    ring_to_json,
)
from steenweb.rings import (
    QQ,
    RingError,
    SchemaError,
    Zp,
    b_odd,
    betti,
    euler,
    validate,
)
from steenweb.steenrod import Prime
from steenweb.action import act_reference


class TestBuilders:
    def test_sphere(self):
        s = build_sphere(4, Zp(2))
        assert s.dims == [1, 0, 0, 0, 1]
        assert validate(s).ok

    def test_cp_rational(self):
        cp2 = build_cp(2, QQ)
        assert cp2.dims == [1, 0, 1, 0, 1]
        x = [Fraction(1)]
        assert cp2.mult(2, x, 2, x) == [Fraction(1)]  # x*x generates degree 4

    def test_cp_mod2_cartan_tables(self):
        cp3 = build_cp(3, Zp(2))
        assert validate(cp3).ok  # includes the Cartan check
        # Sq^2 x = x^2
        assert cp3.op_apply(2, 2, [1]).tolist() == [1]

    def test_hp_mod2_choice(self):
        hp = build_hp(3, Zp(2))
        assert hp.op_apply(4, 4, [1]).tolist() == [1]  # Sq^4 y = y^2
        for k in (1, 2, 3):
            img = hp.op_apply(k, 4, [1])
            assert img.size == 0 or not img.any()

    def test_product_kunneth_dims(self):
        pr = build_product(build_sphere(3, QQ), build_hp(2, QQ))
        assert [d for d, v in enumerate(pr.dims) if v] == [0, 3, 4, 7, 8, 11]
        a, b = build_cp(2, QQ), build_sphere(2, QQ)
        conv = np.convolve(betti(a), betti(b)).tolist()
        assert betti(build_product(a, b)) == conv

    def test_m6_family(self):
        m6 = build_connected_sum_m6(2, QQ)
        assert m6.dims == [1, 0, 1, 4, 1, 0, 1]
        assert b_odd(m6) == 4 and euler(m6) == 0
        assert validate(m6).ok
        m61 = build_connected_sum_m6(1, QQ)
        assert b_odd(m61) == 2 and euler(m61) == 2
        with pytest.raises(RingError):
            build_connected_sum_m6(1, Zp(2))  # modelled rationally only

    def test_betti_helpers(self):
        hp2 = build_hp(2, QQ)
        assert b_odd(hp2) == 0 and euler(hp2) == 3
        assert b_odd(build_sphere(3, QQ)) == 1

    def test_truncated_odd_generator_rejected_at_odd_p(self):
        # x odd degree with x^2 != 0 cannot be graded-commutative off p=2
        with pytest.raises(RingError):
            build_truncated_poly(1, 3, Zp(3))
        assert validate(build_truncated_poly(1, 3, Zp(2))).ok

    def test_product_operation_tables_match_cartan(self):
        pr = build_product(build_sphere(2, Zp(2)), build_cp(3, Zp(2)))
        assert pr.steenrod is not None
        assert validate(pr).ok


class TestValidationFailures:
    def test_commutativity_witness(self):
        ring = build_product(build_sphere(3, QQ), build_sphere(5, QQ))
        t = ring.table(3, 5)
        t[0][0][0] = Fraction(2)  # break b*a = -a*b
        rep = validate(ring)
        assert not rep.ok
        assert any(f["axiom"] == "graded-commutativity" for f in rep.failures)

    def test_poincare_witness(self):
        ring = build_cp(2, QQ)
        ring.table(2, 2)[0][0][0] = Fraction(0)
        rep = validate(ring)
        assert any("poincare" in f["axiom"] or f["axiom"] == "associativity"
                   for f in rep.failures)


class TestRingJson:
    def test_round_trip_q(self):
        m6 = build_connected_sum_m6(3, QQ)
        doc = ring_to_json(m6)
        back = ring_from_json(doc)
        assert back.dims == m6.dims
        assert validate(back).ok

    def test_round_trip_zp_with_operations(self):
        pr = build_product(build_sphere(2, Zp(2)), build_cp(3, Zp(2)))
        back = ring_from_json(ring_to_json(pr))
        assert back.steenrod is not None and validate(back).ok

    def test_rational_strings(self):
        cp = build_cp(2, QQ)
        cp.table(2, 2)[0][0][0] = Fraction(1, 2)
        doc = ring_to_json(cp)
        entry = [e for e in doc["products"] if e["i"] == 2 and e["j"] == 2][0]
        assert entry["coords"] == ["1/2"]
        back = ring_from_json(doc, check=False)
        assert back.table(2, 2)[0][0][0] == Fraction(1, 2)

    def test_schema_errors(self):
        with pytest.raises(SchemaError):
            ring_from_json({"n": 2, "field": "Q", "dims": [1, 0]})
        with pytest.raises(SchemaError):
            ring_from_json(
                {"n": 2, "field": "Q", "dims": [1, 0, 1],
                 "products": [{"i": 0, "a": 0, "j": 0, "b": 0, "coords": [1, 2]}]}
            )

    def test_corrupted_table_fails_validation(self):
        doc = ring_to_json(build_connected_sum_m6(1, QQ))
        for e in doc["products"]:
            if e["i"] == 2 and e["j"] == 4:  # x*z only: breaks commutativity
                e["coords"] = [2]
        with pytest.raises(SchemaError):
            ring_from_json(doc)


class TestDisguise:
    def test_disguised_ring_valid_and_isomorphic_dims(self):
        rng = np.random.default_rng(11)
        ring = build_product(build_sphere(3, Zp(3)), build_sphere(3, Zp(3)))
        mats = {d: _random_invertible_mod_p(rng, ring.dims[d], 3)
                for d in range(1, ring.n + 1) if ring.dims[d]}
        dz = change_basis_mod_p(ring, mats)
        assert dz.dims == ring.dims
        assert validate(dz).ok


class TestOracleCompatibility:
    """Operation tables on truncated builders agree with the action
    oracle acting on powers of a polynomial generator."""

    @pytest.mark.parametrize("p,k", [(2, 1), (2, 2), (2, 4), (3, 2), (5, 2)])
    def test_tables_match_polynomial_action(self, p, k):
        q = 4
        ring = build_truncated_poly(k, q, Zp(p))
        assert ring.steenrod is not None
        prime = Prime(p)
        m = k if p == 2 else k // 2
        unit = 1 if p == 2 else 2 * (p - 1)
        for e in range(1, q + 1):
            for s in range(1, (ring.n - e * k) // unit + 1):
                vec = ring.zero_vec(e * k)
                vec[0] = 1
                img = ring.op_apply(s, e * k, vec)
                # oracle: act on t^(m*e) in one variable, truncate at q*m
                poly = act_reference(prime, (s,), {(m * e,): 1})
                poly = {f: c for f, c in poly.items() if f[0] <= q * m}
                got = int(img[0]) if img.size else 0
                want = 0
                for f, c in poly.items():
                    assert f[0] % m == 0
                    want = c
                assert got == want % p, (p, k, e, s)
