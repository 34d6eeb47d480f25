#include "sketchy/diagnostics.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace sketchy {

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

TraceWriter::TraceWriter(std::ostream& out) : out_(out) {}

TraceWriter::~TraceWriter() {
  try {
    flush();
  } catch (...) {
  }
}

const char* TraceWriter::header() {
  return "t,obj_p,infeas_abs,obj_residual_rel,infeas_rel,gap_bound,gamma,q_t,xi,wall_ms";
}

void TraceWriter::ensure_header() {
  if (header_written_) return;
  out_ << header() << '\n';
  header_written_ = true;
}

void TraceWriter::write(const TraceRow& r) {
  ensure_header();
  out_ << r.t << ',' << format_double(r.obj_p) << ',' << format_double(r.infeas_abs) << ','
       << format_double(r.obj_residual_rel) << ',' << format_double(r.infeas_rel) << ','
       << format_double(r.gap_bound) << ',' << format_double(r.gamma) << ',' << r.q_t << ','
       << format_double(r.xi) << ',' << format_double(r.wall_ms) << '\n';
  if (!out_) throw std::runtime_error("trace writer: I/O failure");
  ++rows_;
}

void TraceWriter::flush() {
  ensure_header();
  out_.flush();
  if (!out_) throw std::runtime_error("trace writer: I/O failure");
}

TraceRow parse_trace_row(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (fields.size() != 10) throw std::invalid_argument("trace row must have 10 fields");
  TraceRow r;
  r.t = std::stoll(fields[0]);
  r.obj_p = std::stod(fields[1]);
  r.infeas_abs = std::stod(fields[2]);
  r.obj_residual_rel = std::stod(fields[3]);
  r.infeas_rel = std::stod(fields[4]);
  r.gap_bound = std::stod(fields[5]);
  r.gamma = std::stod(fields[6]);
  r.q_t = std::stoll(fields[7]);
  r.xi = std::stod(fields[8]);
  r.wall_ms = std::stod(fields[9]);
  return r;
}

}  // namespace sketchy
