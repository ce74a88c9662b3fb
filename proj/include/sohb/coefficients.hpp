#pragma once

#include <string>
#include <vector>

#include "sohb/core.hpp"

namespace sohb {

/// Model constants.  c1..c4 are user inputs (no kinetic closure is computed);
/// eps_relax is the relaxation parameter of the conservative approximation and
/// nu_visc the viscosity coefficient -- independent parameters even though
/// they share a symbol upstream.
struct Coefficients {
    double c1 = 1.0;       // > 0, fluid speed
    double c2 = 1.0;       // convection speed of the frame
    double c3 = 1.0;       // > 0, pressure coefficient
    double c4 = 0.0;       // alignment-gradient coefficient
    double eps_relax = 1e-2; // > 0
    double nu_visc = 0.0;  // >= 0

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (!(c1 > 0.0)) v.push_back("c1 > 0 violated (c1 = " + std::to_string(c1) + ")");
        if (!(c3 > 0.0)) v.push_back("c3 > 0 violated (c3 = " + std::to_string(c3) + ")");
        if (!(eps_relax > 0.0))
            v.push_back("eps_relax > 0 violated (eps_relax = " + std::to_string(eps_relax) + ")");
        if (!(nu_visc >= 0.0))
            v.push_back("nu_visc >= 0 violated (nu_visc = " + std::to_string(nu_visc) + ")");
        return v;
    }

    void validate() const {
        const auto v = violations();
        if (v.empty()) return;
        std::string msg = "invalid coefficients:";
        for (const auto& s : v) msg += "\n  " + s;
        throw ValidationError(msg);
    }
};

} // namespace sohb
