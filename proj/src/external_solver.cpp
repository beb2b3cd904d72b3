#include "skygrid/external_solver.hpp"

#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <unistd.h>

#include "skygrid/lp_format.hpp"

namespace skygrid {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::filesystem::path fresh_dir() {
  static std::atomic<int> counter{0};
  auto base = std::filesystem::temp_directory_path() /
              ("skygrid-ext-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(base);
  return base;
}

}  // namespace

MilpSolution solve_external(const MilpInstance& inst, const std::string& command,
                            const std::filesystem::path& work_dir) {
  const auto start = std::chrono::steady_clock::now();
  const auto dir = work_dir.empty() ? fresh_dir() : work_dir;
  std::filesystem::create_directories(dir);
  const auto lp_path = dir / "instance.lp";
  const auto sol_path = dir / "solution.txt";
  std::filesystem::remove(sol_path);
  write_lp_file(inst, lp_path);

  const std::string cmd = command + " " + shell_quote(lp_path.string()) + " " + shell_quote(sol_path.string());
  const int raw = std::system(cmd.c_str());
  if (raw == -1 || !WIFEXITED(raw)) throw ExternalSolverError("failed to run external solver: " + command);
  const int code = WEXITSTATUS(raw);

  MilpSolution sol;
  if (code == 2) {
    sol.status = SolveStatus::infeasible;
  } else if (code != 0) {
    throw ExternalSolverError("external solver exited with code " + std::to_string(code));
  } else {
    sol = read_solution_file(sol_path, inst);
    const Evaluation ev = evaluate(inst, sol.values);
    if (!ev.feasible()) {
      std::ostringstream msg;
      msg << "external solution rejected: max row violation " << ev.max_violation;
      if (ev.worst_row >= 0) msg << " at '" << inst.constraints()[ev.worst_row].name << "'";
      msg << ", bound violation " << ev.max_bound_violation << ", integrality " << ev.max_integrality;
      throw ExternalSolverError(msg.str());
    }
    sol.objective = ev.objective;
    sol.stats.best_bound = ev.objective;
  }
  sol.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (work_dir.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }
  return sol;
}

}  // namespace skygrid
