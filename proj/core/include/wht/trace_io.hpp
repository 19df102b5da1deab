#pragma once

#include <iosfwd>
#include <string>

#include "wht/solvers.hpp"

namespace wht {

// Trace CSV layout, version 1:
//   # wht-trace v1
//   # initial_f=<value>
//   iter,f,support_size,step_norm,event
// One row per trace record. Several records may share an iter value (a
// gradient step followed by a Newton or restart record in the same iteration).
inline constexpr int kTraceCsvVersion = 1;

void write_trace_csv(const RunTrace& trace, std::ostream& out);
void write_trace_csv(const RunTrace& trace, const std::string& path);

/// Full record including support indices, final x and termination reason.
std::string trace_to_json(const RunTrace& trace, int indent = -1);

/// Shortest round-trip decimal form of v.
std::string format_real(double v);

}  // namespace wht
