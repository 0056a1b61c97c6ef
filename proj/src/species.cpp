#include "bvlat/species.hpp"

#include <algorithm>
#include <map>

namespace bvlat {

SpeciesTable::SpeciesTable(std::vector<SpeciesDecl> const &decls)
{
	std::map<std::string, Species> by_name;
	for (auto const &d : decls) {
		if (d.name.empty() || d.name.size() > 24)
			throw model_error("bad species name: '" + d.name + "'");
		if (d.name.size() >= 3 && d.name.substr(d.name.size() - 3) == "_af")
			throw model_error("species name may not end in _af: " + d.name);
		if (by_name.count(d.name))
			throw model_error("duplicate species: " + d.name);
		if (d.kinetic && d.odd)
			throw model_error("kinetic species must be even: " + d.name);
		Species s;
		s.name = d.name;
		s.odd = d.odd;
		s.ghost = d.ghost;
		s.af = 0;
		s.kinetic = d.kinetic;
		by_name[s.name] = s;
		Species a;
		a.name = d.name + "_af";
		a.odd = !d.odd;
		a.ghost = -d.ghost - 1;
		a.af = 1;
		a.kinetic = false;
		by_name[a.name] = a;
	}
	if (by_name.size() > 200)
		throw model_error("too many species");
	// ids in name order: generator keys then sort by (site, species name)
	for (auto &[name, s] : by_name)
		v_.push_back(s);
	for (int i = 0; i < int(v_.size()); ++i) {
		auto &s = v_[size_t(i)];
		std::string pname = s.af ? s.name.substr(0, s.name.size() - 3) : s.name + "_af";
		s.partner = id_of(pname);
		if (s.kinetic)
			kinetic_.push_back(i);
	}
}

int SpeciesTable::id_of(std::string const &name) const
{
	for (int i = 0; i < int(v_.size()); ++i)
		if (v_[size_t(i)].name == name)
			return i;
	throw model_error("unknown species: " + name);
}

bool SpeciesTable::operator==(SpeciesTable const &o) const
{
	if (v_.size() != o.v_.size())
		return false;
	for (size_t i = 0; i < v_.size(); ++i)
		if (v_[i].name != o.v_[i].name || v_[i].odd != o.v_[i].odd ||
		    v_[i].ghost != o.v_[i].ghost || v_[i].kinetic != o.v_[i].kinetic)
			return false;
	return true;
}

} // namespace bvlat
