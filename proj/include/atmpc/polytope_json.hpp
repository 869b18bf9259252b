#pragma once

#include "atmpc/polytope.hpp"
#include "json.hpp"

namespace atmpc {

/// {"dim", "normals" (rows), "offsets", "vertices"}.  Non-finite numbers become null.
nlohmann::json polytope_to_json(const Polytope& p);

/// Reads the same object.  Either representation may be absent; the H-rep
/// wins when both are given.  Throws GeometryError on malformed input.
Polytope polytope_from_json(const nlohmann::json& j);

}  // namespace atmpc
