#pragma once

#include <vector>

#include "adiapump/errors.hpp"

namespace adiapump {

/// Finite pump block coupled to n uniform tight-binding leads.
///
/// Global index layout: pump sites first (0..m-1), then lead blocks of
/// lead_length sites each. Within a lead, site x=1 is the one coupled to
/// the pump; x counts lattice spacings from the attachment point.
struct LatticeGeometry {
  int n_leads = 0;
  int pump_sites = 0;
  int lead_length = 0;
  std::vector<int> attach_map;  // lead j couples to pump site attach_map[j]

  int total_sites() const { return pump_sites + n_leads * lead_length; }
  int pump_index(int p) const { return p; }
  int lead_index(int j, int x) const {  // x in 1..lead_length
    return pump_sites + j * lead_length + (x - 1);
  }
  int lead_offset(int j) const { return pump_sites + j * lead_length; }

  void validate() const {
    if (n_leads < 1 || pump_sites < 1)
      throw ModelInvalidError("geometry: need at least one lead and one pump site");
    if (static_cast<int>(attach_map.size()) != n_leads)
      throw ModelInvalidError("geometry: attach_map size must equal n_leads");
    for (int p : attach_map)
      if (p < 0 || p >= pump_sites)
        throw ModelInvalidError("geometry: attach_map entry out of range");
  }

  LatticeGeometry with_lead_length(int L) const {
    LatticeGeometry g = *this;
    g.lead_length = L;
    return g;
  }
};

}  // namespace adiapump
