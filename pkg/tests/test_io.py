import numpy as np
import pytest

from superosc import DomainError
from superosc.approximation import fejer, fejer_hat
from superosc.io import load_bandlimited, load_density, load_observable, load_state


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p
    return _write


class TestBandlimited:
    def test_round_trip_fejer(self, write):
        lam = np.linspace(-1, 1, 1025)
        hat = fejer_hat(1.0)(lam)
        body = "# lam re im\n" + "\n".join(f"{float(l)!r}, {float(h)!r}, 0.0" for l, h in zip(lam, hat))
        psi = load_bandlimited(write("f.txt", body))
        assert psi.B == 1.0
        np.testing.assert_allclose(psi(np.array([0.0, 2.0])), fejer(np.array([0.0, 2.0])), atol=1e-7)

    def test_rejects_asymmetric(self, write):
        with pytest.raises(DomainError, match="symmetric"):
            load_bandlimited(write("f.txt", "0 1 0\n1 1 0\n2 1 0\n"))

    def test_rejects_column_count(self, write):
        with pytest.raises(DomainError, match="3 columns"):
            load_bandlimited(write("f.txt", "-1 1\n0 1\n1 1\n"))


class TestDensity:
    def test_renormalised(self, write):
        d = load_density(write("d.txt", "-1 2\n0 2\n1 4  # trailing comment\n"))
        np.testing.assert_allclose(d.weights, [0.25, 0.25, 0.5])

    def test_negative_weight(self, write):
        with pytest.raises(DomainError):
            load_density(write("d.txt", "0 1\n1 -1\n"))

    def test_non_numeric(self, write):
        with pytest.raises(DomainError, match=":2:"):
            load_density(write("d.txt", "0 1\nx 1\n"))

    def test_empty(self, write):
        with pytest.raises(DomainError, match="no data"):
            load_density(write("d.txt", "# nothing\n\n"))


class TestStatesAndObservables:
    def test_state(self, write):
        s = load_state(write("s.txt", "2\n1 0\n0 1\n"))
        np.testing.assert_allclose(s.amplitudes, np.array([1, 1j]) / np.sqrt(2))

    def test_state_wrong_rows(self, write):
        with pytest.raises(DomainError):
            load_state(write("s.txt", "3\n1 0\n0 1\n"))

    def test_bad_header(self, write):
        with pytest.raises(DomainError, match="dimension"):
            load_state(write("s.txt", "1.5\n1 0\n"))

    def test_observable_sigma_y(self, write):
        A = load_observable(write("a.txt", "2\n0 0  0 -1\n0 1  0 0\n"))
        np.testing.assert_allclose(A.matrix, [[0, -1j], [1j, 0]])

    def test_observable_must_be_hermitian(self, write):
        with pytest.raises(DomainError, match="Hermitian"):
            load_observable(write("a.txt", "2\n0 0 1 0\n0 0 0 0\n"))
