#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bvlat/errors.hpp"

namespace bvlat {

/// One field/antifield type of the algebra. Every declared field species gets
/// an automatically generated antifield partner named "<name>_af" with the
/// opposite parity, ghost number -g-1 and antifield number 1.
///
/// The grading "#ta" used when setting antifield-dependent elements to zero
/// after gauge fixing is housed here as the antifield number (assumption
/// #ta == #af; see bv.hpp).
struct Species {
	std::string name;
	bool odd = false;
	int ghost = 0;
	int af = 0;         // antifield number: 0 or 1
	int partner = -1;   // species id of the paired field/antifield
	bool kinetic = false; // participates in propagator contractions

	int pure_ghost() const { return af == 0 ? std::max(ghost, 0) : 0; }
};

struct SpeciesDecl {
	std::string name;
	bool odd = false;
	int ghost = 0;
	bool kinetic = false;
};

class SpeciesTable {
  public:
	SpeciesTable() = default;
	/// Builds the table: declared species plus derived antifields, ids
	/// assigned in name order so that generator keys sort canonically.
	explicit SpeciesTable(std::vector<SpeciesDecl> const &decls);

	int size() const { return int(v_.size()); }
	Species const &operator[](int id) const { return v_[size_t(id)]; }
	int id_of(std::string const &name) const;
	std::vector<int> const &kinetic_ids() const { return kinetic_; }

	bool operator==(SpeciesTable const &o) const;

  private:
	std::vector<Species> v_;
	std::vector<int> kinetic_;
};

/// A generator is one symbol species(site), packed so that integer order is
/// the canonical monomial order: by site first, then species name.
using Gen = uint32_t;

inline Gen pack_gen(int site, int species_id)
{
	return (uint32_t(site) << 8) | uint32_t(species_id);
}
inline int gen_site(Gen g) { return int(g >> 8); }
inline int gen_species(Gen g) { return int(g & 0xff); }

} // namespace bvlat
