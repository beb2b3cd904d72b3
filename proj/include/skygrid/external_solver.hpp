#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "skygrid/milp.hpp"

namespace skygrid {

class ExternalSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs `<command> <lp-file> <solution-file>`. Exit code 0 means solved,
/// 2 means infeasible; anything else is an error. A returned solution is
/// re-checked with evaluate() and rejected if it violates the instance.
/// Files are placed in `work_dir` (a fresh temporary directory if empty).
MilpSolution solve_external(const MilpInstance& inst, const std::string& command,
                            const std::filesystem::path& work_dir = {});

}  // namespace skygrid
