#pragma once

// Shipped demo systems.
//
//   sl2: pair of hyperbolic elements of SL(2,R) with eigenvalues 4, 1/4;
//        the second is the first conjugated by a quarter-turn rotation.
//   sl3: pair in SL(3,R) built from diag(4, 1, 1/4) and a conjugate of it
//        by a generic rotation; squared so the ping-pong certificate holds
//        with the default ball radius.

#include "weyl/core.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace weyl {

inline std::vector<std::string> preset_names() { return {"sl2", "sl3"}; }

inline nlohmann::ordered_json preset_config(const std::string& name) {
  nlohmann::ordered_json cfg;
  if (name == "sl2") {
    cfg["dimension"] = 2;
    cfg["generators"] = {
        std::vector<double>{4.0, 0.0, 0.0, 0.25},
        std::vector<double>{2.125, 1.875, 1.875, 2.125},
    };
    cfg["power"] = 2;
  } else if (name == "sl3") {
    cfg["dimension"] = 3;
    cfg["generators"] = {
        std::vector<double>{4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25},
        std::vector<double>{1.1020214676356117, 0.5367382210085343, -1.4677527135970019,
                            0.5367382210085343, 1.1518374683283394, -0.57431958154698526,
                            -1.4677527135970019, -0.57431958154698526, 2.9961410640360495},
    };
    cfg["power"] = 2;
  } else {
    throw ParseError("unknown preset '" + name + "' (available: sl2, sl3)");
  }
  cfg["ball_radius"] = 0.2;
  cfg["sample_count"] = 1000;
  cfg["seed"] = 1;
  return cfg;
}

}  // namespace weyl
