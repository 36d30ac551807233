#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hodd {

/// Single-qubit Pauli letter in symplectic encoding: bit 0 = X part, bit 1 = Z part.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

char to_char(Pauli p);

class PauliError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A projective n-qubit Pauli word. Global phases are never tracked, so
/// Y*X == Z and two strings compare equal iff their letters match.
class PauliString {
 public:
  explicit PauliString(std::size_t num_qubits);
  explicit PauliString(std::vector<Pauli> letters);

  /// Parses "XZIY"-style text. '_' is accepted as an alias for 'I'.
  static PauliString parse(std::string_view text);
  static PauliString identity(std::size_t num_qubits) { return PauliString(num_qubits); }
  static PauliString single(std::size_t num_qubits, std::size_t qubit, Pauli p);

  std::size_t num_qubits() const { return letters_.size(); }
  Pauli operator[](std::size_t q) const { return letters_[q]; }
  const std::vector<Pauli>& letters() const { return letters_; }

  std::size_t weight() const;
  bool is_identity() const { return weight() == 0; }
  std::string str() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend auto operator<=>(const PauliString& a, const PauliString& b) { return a.letters_ <=> b.letters_; }

 private:
  std::vector<Pauli> letters_;
};

/// Projective product; throws PauliError on mismatched qubit counts.
PauliString pauli_product(const PauliString& a, const PauliString& b);
inline PauliString operator*(const PauliString& a, const PauliString& b) { return pauli_product(a, b); }

bool commutes(const PauliString& a, const PauliString& b);

/// chi_sigma(g): +1 if sigma and g commute, -1 if they anticommute.
int sign_character(const PauliString& sigma, const PauliString& g);

/// Dense 2^n x 2^n matrix with the canonical phase convention
/// (Y = [[0,-i],[i,0]]); qubit 0 is the most significant tensor factor.
Eigen::MatrixXcd dense_matrix(const PauliString& p);

/// Finite Pauli subgroup used to average away the system-bath coupling.
/// Elements are given explicitly; closure is checked, never generated.
class DecouplingGroup {
 public:
  /// Throws PauliError if the list is empty, does not start with the identity,
  /// mixes qubit counts, repeats an element, or is not closed under products.
  static DecouplingGroup from_elements(std::vector<PauliString> elements);
  /// {I, X, Y, Z} on one qubit.
  static DecouplingGroup single_qubit_universal();

  std::size_t order() const { return elements_.size(); }
  std::size_t num_qubits() const { return elements_.front().num_qubits(); }
  const std::vector<PauliString>& elements() const { return elements_; }
  const PauliString& element(std::size_t i) const { return elements_.at(i); }

  std::optional<std::size_t> index_of(const PauliString& p) const;
  /// Index of element(i) * element(j).
  std::size_t product_index(std::size_t i, std::size_t j) const;

  friend bool operator==(const DecouplingGroup&, const DecouplingGroup&) = default;

 private:
  explicit DecouplingGroup(std::vector<PauliString> elements);
  std::vector<PauliString> elements_;
  std::vector<std::size_t> products_;  // row-major order x order
};

struct AxisCancellation {
  PauliString axis;
  int character_sum = 0;
  bool cancelled = false;
};

struct SystemTermCheck {
  PauliString term;
  bool commutes_with_group = false;
};

struct DecouplingReport {
  std::vector<AxisCancellation> axes;
  std::vector<SystemTermCheck> system_terms;
  bool pass = false;
};

/// Exact integer character-sum criterion: each axis must have sum_g chi(g) == 0
/// and each system Hamiltonian term must commute with every group element.
DecouplingReport verify_decoupling_group(const DecouplingGroup& group,
                                         std::span<const PauliString> interaction_axes,
                                         std::span<const PauliString> system_terms = {});

/// chi_alpha(g_l) for each axis alpha (row) and group element l (column).
class SignCharacterTable {
 public:
  SignCharacterTable(std::vector<PauliString> axes, std::size_t group_order,
                     std::vector<std::int8_t> signs);

  std::size_t num_axes() const { return axes_.size(); }
  std::size_t group_order() const { return group_order_; }
  const std::vector<PauliString>& axes() const { return axes_; }
  int sign(std::size_t axis, std::size_t element) const {
    return signs_[axis * group_order_ + element];
  }
  int row_sum(std::size_t axis) const;

 private:
  std::vector<PauliString> axes_;
  std::size_t group_order_;
  std::vector<std::int8_t> signs_;
};

/// Throws PauliError if any axis row does not sum to zero over the group.
SignCharacterTable character_table(const DecouplingGroup& group, std::span<const PauliString> axes);

/// The weight-1 Paulis X, Y, Z on each qubit (3n axes), ordered by qubit then letter.
std::vector<PauliString> weight_one_axes(std::size_t num_qubits);

}  // namespace hodd
