#pragma once

// CPLEX-LP text writer/reader and the `name value` solution file format.
// See docs/lp-format.md for the exact layout.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "skygrid/milp.hpp"

namespace skygrid {

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps every character outside [A-Za-z0-9_()[],=] to '_'; a leading digit or
/// '.' gets a '_' prefix.
std::string sanitize_name(std::string_view name);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_number(double v);

void write_lp(const MilpInstance& inst, std::ostream& out);
void write_lp_file(const MilpInstance& inst, const std::filesystem::path& path);

MilpInstance read_lp(std::istream& in);
MilpInstance read_lp_file(const std::filesystem::path& path);

/// Writes `name value` lines for every variable.
void write_solution_file(const MilpInstance& inst, const std::vector<double>& values,
                         const std::filesystem::path& path);

/// Parses `name value` lines; '#' starts a comment. Unlisted variables are 0.
/// Status is left as optimal and the objective is recomputed from the values.
MilpSolution read_solution_file(const std::filesystem::path& path, const MilpInstance& inst);
MilpSolution read_solution(std::istream& in, const MilpInstance& inst);

}  // namespace skygrid
