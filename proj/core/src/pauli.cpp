#include "hodd/pauli.hpp"

#include <algorithm>
#include <sstream>
#include <unsupported/Eigen/KroneckerProduct>

namespace hodd {

namespace {

void require_same_size(const PauliString& a, const PauliString& b) {
  if (a.num_qubits() != b.num_qubits()) {
    std::ostringstream msg;
    msg << "qubit count mismatch: " << a.str() << " (" << a.num_qubits() << ") vs " << b.str()
        << " (" << b.num_qubits() << ")";
    throw PauliError(msg.str());
  }
}

Eigen::Matrix2cd letter_matrix(Pauli p) {
  using C = std::complex<double>;
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, C(0, -1), C(0, 1), 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

}  // namespace

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

PauliString::PauliString(std::size_t num_qubits) : letters_(num_qubits, Pauli::I) {
  if (num_qubits == 0) throw PauliError("Pauli string needs at least one qubit");
}

PauliString::PauliString(std::vector<Pauli> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw PauliError("Pauli string needs at least one qubit");
}

PauliString PauliString::parse(std::string_view text) {
  std::vector<Pauli> letters;
  letters.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'I': case 'i': case '_': letters.push_back(Pauli::I); break;
      case 'X': case 'x': letters.push_back(Pauli::X); break;
      case 'Y': case 'y': letters.push_back(Pauli::Y); break;
      case 'Z': case 'z': letters.push_back(Pauli::Z); break;
      default:
        throw PauliError("invalid Pauli letter '" + std::string(1, c) + "' in \"" +
                         std::string(text) + "\"");
    }
  }
  return PauliString(std::move(letters));
}

PauliString PauliString::single(std::size_t num_qubits, std::size_t qubit, Pauli p) {
  PauliString out(num_qubits);
  out.letters_.at(qubit) = p;
  return out;
}

std::size_t PauliString::weight() const {
  return static_cast<std::size_t>(
      std::count_if(letters_.begin(), letters_.end(), [](Pauli p) { return p != Pauli::I; }));
}

std::string PauliString::str() const {
  std::string s;
  s.reserve(letters_.size());
  for (Pauli p : letters_) s.push_back(to_char(p));
  return s;
}

PauliString pauli_product(const PauliString& a, const PauliString& b) {
  require_same_size(a, b);
  std::vector<Pauli> out(a.num_qubits());
  for (std::size_t q = 0; q < out.size(); ++q) {
    out[q] = static_cast<Pauli>(static_cast<std::uint8_t>(a[q]) ^ static_cast<std::uint8_t>(b[q]));
  }
  return PauliString(std::move(out));
}

bool commutes(const PauliString& a, const PauliString& b) { return sign_character(a, b) == 1; }

int sign_character(const PauliString& sigma, const PauliString& g) {
  require_same_size(sigma, g);
  int anticommuting = 0;
  for (std::size_t q = 0; q < sigma.num_qubits(); ++q) {
    if (sigma[q] != Pauli::I && g[q] != Pauli::I && sigma[q] != g[q]) ++anticommuting;
  }
  return (anticommuting % 2 == 0) ? 1 : -1;
}

Eigen::MatrixXcd dense_matrix(const PauliString& p) {
  Eigen::MatrixXcd out = letter_matrix(p[0]);
  for (std::size_t q = 1; q < p.num_qubits(); ++q) {
    Eigen::MatrixXcd next = Eigen::kroneckerProduct(out, letter_matrix(p[q])).eval();
    out = std::move(next);
  }
  return out;
}

DecouplingGroup::DecouplingGroup(std::vector<PauliString> elements) : elements_(std::move(elements)) {}

DecouplingGroup DecouplingGroup::from_elements(std::vector<PauliString> elements) {
  if (elements.empty()) throw PauliError("decoupling group is empty");
  if (!elements.front().is_identity()) {
    throw PauliError("decoupling group must list the identity first, got " + elements.front().str());
  }
  const std::size_t n = elements.front().num_qubits();
  for (const auto& e : elements) {
    if (e.num_qubits() != n) throw PauliError("group elements mix qubit counts: " + e.str());
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (std::size_t j = i + 1; j < elements.size(); ++j) {
      if (elements[i] == elements[j]) throw PauliError("group element repeated: " + elements[i].str());
    }
  }

  DecouplingGroup group(std::move(elements));
  const std::size_t order = group.order();
  group.products_.resize(order * order);
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = 0; j < order; ++j) {
      const PauliString prod = group.elements_[i] * group.elements_[j];
      const auto idx = group.index_of(prod);
      if (!idx) {
        throw PauliError("group not closed: " + group.elements_[i].str() + " * " +
                         group.elements_[j].str() + " = " + prod.str());
      }
      group.products_[i * order + j] = *idx;
    }
  }
  return group;
}

DecouplingGroup DecouplingGroup::single_qubit_universal() {
  return from_elements({PauliString::parse("I"), PauliString::parse("X"), PauliString::parse("Y"),
                        PauliString::parse("Z")});
}

std::optional<std::size_t> DecouplingGroup::index_of(const PauliString& p) const {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i] == p) return i;
  }
  return std::nullopt;
}

std::size_t DecouplingGroup::product_index(std::size_t i, std::size_t j) const {
  return products_.at(i * order() + j);
}

DecouplingReport verify_decoupling_group(const DecouplingGroup& group,
                                         std::span<const PauliString> interaction_axes,
                                         std::span<const PauliString> system_terms) {
  DecouplingReport report;
  report.pass = true;
  for (const auto& axis : interaction_axes) {
    AxisCancellation check{axis, 0, false};
    for (const auto& g : group.elements()) check.character_sum += sign_character(axis, g);
    check.cancelled = (check.character_sum == 0);
    report.pass = report.pass && check.cancelled;
    report.axes.push_back(std::move(check));
  }
  for (const auto& term : system_terms) {
    SystemTermCheck check{term, true};
    for (const auto& g : group.elements()) {
      if (!commutes(term, g)) {
        check.commutes_with_group = false;
        break;
      }
    }
    report.pass = report.pass && check.commutes_with_group;
    report.system_terms.push_back(std::move(check));
  }
  return report;
}

SignCharacterTable::SignCharacterTable(std::vector<PauliString> axes, std::size_t group_order,
                                       std::vector<std::int8_t> signs)
    : axes_(std::move(axes)), group_order_(group_order), signs_(std::move(signs)) {
  if (signs_.size() != axes_.size() * group_order_) {
    throw std::invalid_argument("character table size mismatch");
  }
}

int SignCharacterTable::row_sum(std::size_t axis) const {
  int sum = 0;
  for (std::size_t l = 0; l < group_order_; ++l) sum += sign(axis, l);
  return sum;
}

SignCharacterTable character_table(const DecouplingGroup& group, std::span<const PauliString> axes) {
  const auto report = verify_decoupling_group(group, axes);
  for (const auto& check : report.axes) {
    if (!check.cancelled) {
      throw PauliError("axis " + check.axis.str() + " is not averaged away by the group (character sum " +
                       std::to_string(check.character_sum) + ")");
    }
  }
  std::vector<std::int8_t> signs;
  signs.reserve(axes.size() * group.order());
  for (const auto& axis : axes) {
    for (const auto& g : group.elements()) signs.push_back(static_cast<std::int8_t>(sign_character(axis, g)));
  }
  return SignCharacterTable(std::vector<PauliString>(axes.begin(), axes.end()), group.order(),
                            std::move(signs));
}

std::vector<PauliString> weight_one_axes(std::size_t num_qubits) {
  std::vector<PauliString> axes;
  for (std::size_t q = 0; q < num_qubits; ++q) {
    for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) axes.push_back(PauliString::single(num_qubits, q, p));
  }
  return axes;
}

}  // namespace hodd
