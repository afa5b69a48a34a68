#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cavitypress/group.hpp"
#include "cavitypress/subshift.hpp"

namespace cavitypress {

class SweepProblem;

/// One translation-invariant interaction term: a shape containing e and its energy table,
/// indexed by pattern_code over the sorted shape.
struct InteractionTerm {
  FiniteRegion shape;
  std::vector<double> table;
};

/// Finite-range potential given by finitely many terms and closed under right translation.
class Interaction {
 public:
  Interaction(std::string name, GroupDescriptor desc, int alphabet_size, std::vector<InteractionTerm> terms);
  /// Skips the stabilizer consistency check (used to build corrupted fixtures).
  static Interaction unchecked(std::string name, GroupDescriptor desc, int alphabet_size,
                               std::vector<InteractionTerm> terms);

  static Interaction zero(const GroupDescriptor& desc, int alphabet_size);
  /// Single-site term -log(lambda) on symbol 1.
  static Interaction hardcore(const GroupDescriptor& desc, double lambda);
  /// Spins {-, +}: pair term -beta s s' along each lattice axis, field term -field s.
  static Interaction ising(const GroupDescriptor& desc, double beta, double field);

  const std::string& name() const { return name_; }
  const GroupDescriptor& desc() const { return desc_; }
  int alphabet_size() const { return q_; }
  const std::vector<InteractionTerm>& terms() const { return terms_; }
  /// Distinct translates of term t that contain e.
  const std::vector<Placement>& anchored(std::size_t t) const { return anchored_[t]; }
  /// Largest shape diameter (0 when all terms are single sites).
  int range() const { return range_; }
  std::string describe() const;

  /// Phi(M g, x) for term t at a placement.
  double term_value(std::size_t t, const Placement& pl, const Pattern& x) const;
  /// Phi_t(A, x) for a translate A of the shape of term t, evaluated through a canonical
  /// representative of A.
  double term_value_on(std::size_t t, const FiniteRegion& a, const Pattern& x) const;

 private:
  Interaction(std::string name, GroupDescriptor desc, int alphabet_size, std::vector<InteractionTerm> terms,
              bool check);

  std::string name_;
  GroupDescriptor desc_;
  int q_;
  std::vector<InteractionTerm> terms_;
  std::vector<std::vector<Placement>> anchored_;
  int range_ = 0;
};

/// Sum over anchored shapes of the largest |value|.
double norm(const Interaction& phi);
/// Same, restricted to assignments that are locally admissible for the SFT.
double norm(const Interaction& phi, const SftSpec& sft);

/// Union of anchored shapes: the coordinates local_energy reads.
FiniteRegion local_energy_support(const Interaction& phi);
/// Coordinates read by the coset-summed local energy.
FiniteRegion coset_energy_support(const Interaction& phi);

/// phi(x) = -sum over shapes A containing e of Phi(A, x) / |A|.
double local_energy(const Interaction& phi, const Pattern& p);
/// phi(k_i . x).
double coset_local_energy(const Interaction& phi, const Pattern& p, int coset);
/// Sum over cosets of phi(k_i . x).
double coset_sum_local_energy(const Interaction& phi, const Pattern& p);

/// Sum of Phi(A, x) over translated shapes A inside supp(p).
double energy(const Interaction& phi, const Pattern& p);
/// Energy of x on T given y outside; +infinity if the concatenation is locally inadmissible.
double boundary_energy(const Interaction& phi, const SftSpec& sft, const Pattern& x, const Pattern& y);

/// Compares Phi(M g, x) with Phi(M, g . x) on random samples.
bool invariance_check(const Interaction& phi, int samples, std::uint64_t seed, int radius = 3);

/// exp(-Phi) factors for every term translate inside the indexed region; when `meeting` is
/// given only translates meeting it are added.
void add_energy_factors(SweepProblem& problem, const Interaction& phi, const SiteIndex& index,
                        const FiniteRegion* meeting = nullptr);

}  // namespace cavitypress
