#pragma once

#include <string>
#include <vector>

#include "hk/maps.hpp"
#include "hk/measure.hpp"

namespace hk {

// Point clouds: header "x1,...,xd,mass", one atom per row.
DiscreteMeasure load_measure(const std::string& path);
void save_measure(const std::string& path, const DiscreteMeasure& m);

// Cone clouds: header "x1,...,xd,r,mass".
ConeMeasure load_cone_measure(const std::string& path);
void save_cone_measure(const std::string& path, const ConeMeasure& m);

// Tangent fields ride on the point-cloud format with extra columns:
// "x1,...,xd,mass,v1,...,vd,beta".
HKTangent load_tangent(const std::string& path);
void save_tangent(const std::string& path, const HKTangent& u);

// Two-column trace "step,value".
void save_trace(const std::string& path, const std::string& value_name,
                const std::vector<double>& values);

struct ConeTangentField;  // lifting.hpp

// Cone tangent fields: "x1,...,xd,r,mass,a1,...,ad,b".
void save_cone_field(const std::string& path, const ConeTangentField& V);

}  // namespace hk
