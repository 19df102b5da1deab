#include "wht/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace wht {

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  out << "# wht-trace v" << kTraceCsvVersion << '\n';
  out << "# initial_f=" << format_real(trace.initial_f) << '\n';
  out << "iter,f,support_size,step_norm,event\n";
  for (const auto& r : trace.records) {
    out << r.iter << ',' << format_real(r.f) << ',' << r.support_size << ','
        << format_real(r.step_norm) << ',' << to_string(r.event) << '\n';
  }
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write_trace_csv(trace, f);
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string trace_to_json(const RunTrace& trace, int indent) {
  nlohmann::json j;
  j["schema_version"] = kTraceCsvVersion;
  j["initial_f"] = trace.initial_f;
  j["termination"] = to_string(trace.termination);
  j["iterations"] = trace.iterations;
  j["restarts"] = trace.restarts;
  j["x"] = trace.x;
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : trace.records) {
    nlohmann::json o;
    o["iter"] = r.iter;
    o["f"] = r.f;
    o["support_size"] = r.support_size;
    o["support"] = r.support.indices();
    o["step_norm"] = r.step_norm;
    o["event"] = to_string(r.event);
    if (r.momentum_t) o["momentum_t"] = *r.momentum_t;
    recs.push_back(std::move(o));
  }
  return j.dump(indent);
}

}  // namespace wht
