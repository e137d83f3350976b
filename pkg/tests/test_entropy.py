import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accessinfo.core import (
    Layout,
    LayoutError,
    MultipartiteState,
    StateError,
    assemble_xq,
    product_state,
    random_density,
    random_ensemble,
    random_multipartite,
)
from accessinfo.entropy import (
    conditional_mutual,
    diagonal_distribution,
    diagonal_mutual_shannon,
    mutual,
    shannon,
    subset_entropy,
    venn2,
    venn3,
    von_neumann,
)

from oracles import H2_SIN2_PI_8, SQ, binary_entropy, entropy_2x2, ket_dm, SIN2_PI_8

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_frozen_constants_match_closed_forms():
    assert SIN2_PI_8 == pytest.approx(math.sin(math.pi / 8) ** 2, abs=1e-16)
    assert H2_SIN2_PI_8 == pytest.approx(binary_entropy(SIN2_PI_8), abs=1e-15)


def test_pure_state_has_zero_entropy():
    assert von_neumann(random_density(4, 1, seed=2)) == pytest.approx(0, abs=1e-9)


def test_maximally_mixed_qubit():
    assert von_neumann(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)


def test_zero_plus_mixture():
    rho = 0.5 * ket_dm((1, 0)) + 0.5 * ket_dm((SQ, SQ))
    assert entropy_2x2(rho) == pytest.approx(H2_SIN2_PI_8, abs=1e-12)
    assert von_neumann(rho) == pytest.approx(H2_SIN2_PI_8, abs=1e-12)


def test_von_neumann_rejects_invalid_state():
    with pytest.raises(StateError):
        von_neumann(np.diag([1.5, -0.5]))


def test_von_neumann_clamps_roundoff():
    assert von_neumann(np.diag([1 + 1e-11, -1e-11])) == pytest.approx(0, abs=1e-9)


@pytest.mark.parametrize("p, h", [((1, 0), 0.0), ((0.5, 0.5), 1.0), ((0.25,) * 4, 2.0)])
def test_shannon(p, h):
    assert shannon(p) == pytest.approx(h, abs=1e-15)


def test_shannon_rejects_bad_vectors():
    with pytest.raises(StateError):
        shannon([0.5, 0.6])
    with pytest.raises(StateError):
        shannon([1.1, -0.1])


@given(seeds, st.integers(1, 6))
@settings(max_examples=40)
def test_entropy_range(seed, dim):
    s = von_neumann(random_density(dim, seed=seed))
    assert -1e-9 <= s <= math.log2(dim) + 1e-9


def test_subset_entropies_of_ensemble_state(bb84):
    s = assemble_xq(bb84)
    assert subset_entropy(s, "X") == pytest.approx(shannon(bb84.probs), abs=1e-12)
    assert subset_entropy(s, "Q") == pytest.approx(von_neumann(bb84.average()), abs=1e-12)
    assert subset_entropy(s, ("X", "Q")) == pytest.approx(von_neumann(s.matrix), abs=1e-12)


def test_mutual_product_state_is_zero():
    s = product_state(A=random_density(2, seed=1), B=random_density(3, seed=2))
    assert mutual(s, "A", "B") == pytest.approx(0, abs=1e-9)


def test_mutual_bell_state(bell):
    s = MultipartiteState(bell, Layout.of(X=2, Y=2))
    assert mutual(s, "X", "Y") == pytest.approx(2.0, abs=1e-12)
    assert mutual(s, "Y", "X") == mutual(s, "X", "Y")


def test_mutual_of_ensemble_state_is_holevo_quantity(zero_plus):
    s = assemble_xq(zero_plus)
    assert mutual(s, "X", "Q") == pytest.approx(H2_SIN2_PI_8, abs=1e-12)


def test_mutual_rejects_overlap():
    s = random_multipartite((2, 2), "AB", seed=0)
    with pytest.raises(LayoutError):
        mutual(s, "A", ("A", "B"))


def test_conditional_mutual_product_is_zero():
    s = product_state(A=random_density(2, seed=1), B=random_density(2, seed=2), C=random_density(2, seed=3))
    assert conditional_mutual(s, "A", "B", "C") == pytest.approx(0, abs=1e-9)


def test_conditional_mutual_ghz():
    v = np.zeros(8)
    v[0] = v[7] = SQ
    s = MultipartiteState(np.outer(v, v), Layout.of(A=2, B=2, C=2))
    # S(AC) = S(BC) = S(C) = 1, S(ABC) = 0: 1 + 1 - 1 - 0
    assert conditional_mutual(s, "A", "B", "C") == pytest.approx(1.0, abs=1e-12)
    # conditioning on nothing: S(A:B) = 1 + 1 - 1
    assert conditional_mutual(s, "A", "B") == pytest.approx(mutual(s, "A", "B"), abs=0)


def test_conditional_mutual_ghz_classical_part_vanishes():
    # dephased GHZ: diag(1/2, 0, ..., 0, 1/2); A and B are copies of C
    s = MultipartiteState(np.diag([0.5, 0, 0, 0, 0, 0, 0, 0.5]), Layout.of(A=2, B=2, C=2))
    assert conditional_mutual(s, "A", "B", "C") == pytest.approx(0.0, abs=1e-12)


def test_strong_subadditivity_seeded_sweep():
    worst = min(conditional_mutual(random_multipartite((2, 2, 2), "ABC", seed=k,
                                                       rank=1 + k % 8), "A", "B", "C")
                for k in range(1000))
    assert worst >= -1e-9


def test_venn2_orthogonal_ensemble(orthogonal):
    v = venn2(assemble_xq(orthogonal), "X", "Q")
    assert (v.left, v.center, v.right) == pytest.approx((0, 1, 0), abs=1e-12)


def test_venn2_product_state():
    ra, rb = random_density(2, seed=4), random_density(2, seed=5)
    v = venn2(product_state(X=ra, Q=rb), "X", "Q")
    assert v.left == pytest.approx(von_neumann(ra), abs=1e-9)
    assert v.center == pytest.approx(0, abs=1e-9)
    assert v.right == pytest.approx(von_neumann(rb), abs=1e-9)


def test_venn3_product_state_has_no_shared_regions():
    s = product_state(X=random_density(2, seed=1), Q=random_density(2, seed=2), A=random_density(2, seed=3))
    v = venn3(s, "X", "Q", "A")
    for r in (v.xy_given_z, v.xz_given_y, v.yz_given_x, v.center):
        assert r == pytest.approx(0, abs=1e-9)


@given(seeds)
@settings(max_examples=40)
def test_venn_regions_reconstruct_subset_entropies(seed):
    s = random_multipartite((2, 3, 2), "XQA", seed=seed)
    v = venn3(s, "X", "Q", "A")
    assert v.total == pytest.approx(subset_entropy(s, ("X", "Q", "A")), abs=1e-9)
    for pair, labels in (("xy", ("X", "Q")), ("xz", ("X", "A")), ("yz", ("Q", "A"))):
        direct = venn2(s, *labels)
        collapsed = v.pair(pair)
        assert collapsed.left == pytest.approx(direct.left, abs=1e-9)
        assert collapsed.center == pytest.approx(direct.center, abs=1e-9)
        assert collapsed.right == pytest.approx(direct.right, abs=1e-9)
        assert direct.left + direct.center == pytest.approx(subset_entropy(s, labels[0]), abs=1e-9)
        assert direct.right + direct.center == pytest.approx(subset_entropy(s, labels[1]), abs=1e-9)
        assert direct.total == pytest.approx(subset_entropy(s, labels), abs=1e-9)


def test_venn_records_and_text():
    s = random_multipartite((2, 2, 2), "XQA", seed=1)
    v = venn3(s, "X", "Q", "A")
    rec = v.to_record()
    assert set(rec["regions"]) == {"S(X|QA)", "S(Q|XA)", "S(A|XQ)", "S(X:Q|A)", "S(X:A|Q)",
                                   "S(Q:A|X)", "S(X:Q:A)"}
    text = v.to_text()
    for name, val in rec["regions"].items():
        line = next(l for l in text.splitlines() if l.strip().startswith(name + " "))
        assert float(line.split()[1]) == pytest.approx(val, abs=5e-7)


def test_diagonal_mutual_shannon_classical_bits():
    s = MultipartiteState(np.diag([0.5, 0, 0, 0.5]), Layout.of(X=2, Y=2))
    assert diagonal_mutual_shannon(s, "X", "Y") == pytest.approx(1.0, abs=1e-12)


def test_diagonal_mutual_shannon_bell(bell):
    s = MultipartiteState(bell, Layout.of(X=2, Y=2))
    np.testing.assert_allclose(diagonal_distribution(s, "X", "Y"), [[0.5, 0], [0, 0.5]], atol=1e-15)
    assert diagonal_mutual_shannon(s, "X", "Y") == pytest.approx(1.0, abs=1e-12)
    assert mutual(s, "X", "Y") == pytest.approx(2.0, abs=1e-12)


def test_diagonal_mutual_shannon_product():
    s = product_state(X=random_density(2, seed=1), Y=random_density(3, seed=2))
    assert diagonal_mutual_shannon(s, "X", "Y") == pytest.approx(0, abs=1e-12)


def test_diagonal_distribution_respects_label_order():
    s = random_multipartite((2, 3), "XY", seed=3)
    fwd = diagonal_distribution(s, "X", "Y")
    back = diagonal_distribution(s, "Y", "X")
    np.testing.assert_allclose(fwd, back.T, atol=1e-15)


@given(seeds, st.integers(1, 3))
@settings(max_examples=50)
def test_concavity_sandwich_and_holevo_range(seed, d):
    e = random_ensemble(d, 3, seed)
    mean_s = sum(p * von_neumann(r) for p, r in zip(e.probs, e.states))
    s_rho = von_neumann(e.average())
    h = shannon(e.probs)
    assert mean_s - 1e-9 <= s_rho <= h + mean_s + 1e-9
    chi = mutual(assemble_xq(e), "X", "Q")
    assert -1e-9 <= chi <= h + 1e-9


@given(seeds)
@settings(max_examples=50)
def test_diagonal_below_quantum_mutual(seed):
    s = random_multipartite((2, 2), "XY", seed=seed, rank=1 + seed % 4)
    assert diagonal_mutual_shannon(s, "X", "Y") <= mutual(s, "X", "Y") + 1e-9
