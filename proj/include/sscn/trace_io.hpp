#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sscn/solver.hpp"

namespace sscn {

inline constexpr const char* kTraceHeader = "k,epochs,F,gap,grad_norm,M_used,elapsed_s";

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

// Header line followed by one row per record; absent optionals are empty fields.
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);

// Inverse of write_trace_csv. Throws ParseError on a bad header or row.
std::vector<TraceRecord> read_trace_csv(std::istream& in);

}  // namespace sscn
