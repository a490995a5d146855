// ksbalance: generate frames, run barrier selections, sweep parameters,
// check the Katz dichotomy, and verify certificates.
//
// Exit codes: 0 success, 1 verification or assertion failure, 2 usage
// error, 3 I/O error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ksbalance/ksbalance.hpp"

using namespace ksbalance;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kIo = 3 };

/// A usage problem found after argument parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A check that did not hold (invalid frame, failed verification).
struct CheckFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// --tol accepts "name=value" pairs; a bare number sets the frame tolerance.
Tolerances parse_tolerances(const std::vector<std::string>& items) {
  Tolerances tol;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    const std::string key = eq == std::string::npos ? "frame" : item.substr(0, eq);
    const std::string text = eq == std::string::npos ? item : item.substr(eq + 1);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      throw UsageError("--tol: cannot parse value in '" + item + "'");
    }
    if (!(value > 0.0) || !std::isfinite(value)) throw UsageError("--tol: value must be positive in '" + item + "'");
    if (key == "hermitian") tol.hermitian = value;
    else if (key == "psd") tol.psd = value;
    else if (key == "jacobi") tol.jacobi_relative = value;
    else if (key == "jacobi_sweeps") tol.jacobi_max_sweeps = static_cast<int>(value);
    else if (key == "sherman_morrison") tol.sherman_morrison_denominator = value;
    else if (key == "gap") tol.potential_gap = value;
    else if (key == "frame") tol.frame = value;
    else if (key == "rescale") tol.rescale = value;
    else if (key == "projection") tol.projection = value;
    else if (key == "feasibility") tol.feasibility_slack = value;
    else if (key == "potential") tol.potential_slack = value;
    else if (key == "monotonic") tol.monotonic_slack = value;
    else if (key == "certificate") tol.certificate_relative = value;
    else if (key == "max_vectors") tol.max_vectors = static_cast<std::size_t>(value);
    else throw UsageError("--tol: unknown tolerance '" + key + "'");
  }
  return tol;
}

void write_output(const std::optional<std::string>& path, const std::string& text) {
  if (path) write_text_file(*path, text);
  else std::cout << text;
}

void print_report(std::ostream& os, const ValidationReport& rep) {
  for (const auto& c : rep.checks) {
    os << "  " << (c.ok ? "ok   " : "FAIL ") << c.name << ": " << fmt17(c.value) << " (limit " << fmt17(c.limit)
       << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
}

// Loads and validates a frame. Frames whose only defect is a norm deviation
// up to tol.rescale are rescaled to exact norms with a warning.
FrameFamily load_frame(const std::string& path, const Tolerances& tol) {
  FrameFamily f = frame_from_json(read_json_file(path));
  const ValidationReport rep = validate_frame(f, tol.frame);
  if (rep.passed()) return f;
  const ValidationReport loose = validate_frame(f, tol.rescale);
  if (loose.passed()) {
    auto [fixed, dev] = equalize_norms(f, tol);
    std::cerr << "warning: " << path << " deviates from an equal-norm Parseval frame by up to " << fmt17(dev)
              << "; norms rescaled to 1/sqrt(N)\n";
    return fixed;
  }
  std::ostringstream msg;
  msg << path << " is not an equal-norm Parseval frame:\n";
  print_report(msg, rep);
  throw CheckFailed(msg.str());
}

struct FrameSource {
  std::optional<std::string> frame_path;
  std::size_t k = 0;
  int N = 0;
  std::optional<std::uint64_t> seed;
  std::string kind = "harmonic";

  FrameFamily make(const Tolerances& tol) const {
    if (frame_path) return load_frame(*frame_path, tol);
    return make_generated(k, N, tol);
  }

  FrameFamily make_generated(std::size_t kk, int NN, const Tolerances& tol) const {
    if (kk < 1) throw UsageError("--k must be at least 1");
    if (NN < 2) throw UsageError("--N must be at least 2");
    if (kind == "modulated" || seed) return modulated_harmonic_frame(kk, NN, seed.value_or(kDefaultSeed), tol);
    return harmonic_frame(kk, NN, tol);
  }
};

int cmd_gen(const FrameSource& src, const std::optional<std::string>& out, const Tolerances& tol) {
  const FrameFamily f = src.make_generated(src.k, src.N, tol);
  write_output(out, dump(frame_to_json(f)));
  std::ostream& info = out ? std::cout : std::cerr;
  const ValidationReport rep = validate_frame(f, tol.frame);
  info << "frame k=" << f.k() << " N=" << f.N() << " m=" << f.m() << (rep.passed() ? " valid" : " INVALID") << "\n";
  print_report(info, rep);
  return rep.passed() ? kOk : kFailed;
}

int cmd_select(const std::string& frame_path, long long n, const std::optional<std::string>& out, unsigned threads,
               const Tolerances& tol) {
  const FrameFamily f = load_frame(frame_path, tol);
  if (n < 1) throw UsageError("--n must be at least 1");
  if (static_cast<std::size_t>(n) >= f.m())
    throw UsageError("--n must be smaller than m = " + std::to_string(f.m()));

  SelectorOptions opts{tol, threads};
  SelectionCertificate cert;
  try {
    cert = select_subset(f, static_cast<std::size_t>(n), opts);
  } catch (const SelectionFailure& e) {
    std::cerr << e.what() << "\nU profile at step " << e.step() << " (index, U):\n";
    for (const auto& [i, u] : e.profile()) std::cerr << "  " << i + 1 << " " << fmt17(u) << "\n";
    return kFailed;
  }
  write_output(out, dump(certificate_to_json(cert)));

  std::ostream& info = out ? std::cout : std::cerr;
  const double ratio = static_cast<double>(n) / static_cast<double>(f.m());
  info << "selected n=" << n << " of m=" << f.m() << " (k=" << f.k() << ", N=" << f.N() << ")\n"
       << "lambda_max(T_n) = " << fmt17(cert.lambda_max()) << "\n"
       << "a_n             = " << fmt17(cert.bound) << "\n"
       << "margin          = " << fmt17(cert.margin()) << "\n"
       << "excess (lambda_max - n/m) = " << fmt17(cert.lambda_max() - ratio) << "\n";
  if (cert.norm_deviation > 0.0) info << "input norm deviation = " << fmt17(cert.norm_deviation) << "\n";
  const auto hist = eigenvalue_histogram(cert.eigenvalues, 10, 0.0, cert.bound);
  info << "spectrum of T_n over [0, a_n] in 10 bins:";
  for (auto c : hist) info << " " << c;
  info << "\n";
  return kOk;
}

int cmd_sweep(const FrameSource& src, long long n_from, long long n_to, const std::vector<int>& N_list,
              std::optional<double> fraction, const std::optional<std::string>& out, unsigned threads,
              const Tolerances& tol) {
  std::vector<std::pair<FrameFamily, std::vector<std::size_t>>> plan;
  auto ns_for = [&](std::size_t m) {
    std::vector<std::size_t> ns;
    if (fraction) {
      const auto n = static_cast<long long>(std::llround(*fraction * static_cast<double>(m)));
      if (n < 1 || static_cast<std::size_t>(n) >= m) throw UsageError("--fraction gives n outside 1..m-1");
      ns.push_back(static_cast<std::size_t>(n));
    } else {
      for (long long n = n_from; n <= n_to; ++n) {
        if (n < 1 || static_cast<std::size_t>(n) >= m) throw UsageError("n-range must lie within 1..m-1");
        ns.push_back(static_cast<std::size_t>(n));
      }
    }
    return ns;
  };
  if (!N_list.empty()) {
    if (src.frame_path) throw UsageError("--N-list cannot be combined with --frame");
    for (int NN : N_list) {
      FrameFamily f = src.make_generated(src.k, NN, tol);
      auto ns = ns_for(f.m());
      plan.emplace_back(std::move(f), std::move(ns));
    }
  } else {
    FrameFamily f = src.make(tol);
    auto ns = ns_for(f.m());
    plan.emplace_back(std::move(f), std::move(ns));
  }

  std::ostringstream csv;
  csv << "k,N,m,n,lambda_max,a_n,excess,excess_sqrtN,complement_lambda_min\n";
  bool all_ok = true;
  for (const auto& [f, ns] : plan) {
    for (std::size_t n : ns) {
      const auto cert = select_subset(f, n, SelectorOptions{tol, threads});
      const auto comp = complement_lower_bound(f, cert, tol);
      const double excess = cert.lambda_max() - static_cast<double>(n) / static_cast<double>(f.m());
      all_ok = all_ok && cert.lambda_max() < cert.bound;
      csv << f.k() << "," << f.N() << "," << f.m() << "," << n << "," << fmt17(cert.lambda_max()) << ","
          << fmt17(cert.bound) << "," << fmt17(excess) << "," << fmt17(excess * std::sqrt(f.N())) << ","
          << fmt17(comp.lambda_min) << "\n";
    }
  }
  write_output(out, csv.str());
  return all_ok ? kOk : kFailed;
}

int cmd_katz(int N, bool sampled, std::uint64_t trials, std::uint64_t seed, const std::optional<std::string>& out) {
  if (N < 1) throw UsageError("--N must be at least 1");
  DichotomyOptions opts;
  opts.sampled = sampled;
  opts.trials = trials;
  opts.seed = seed;
  if (!sampled && N > opts.limits.max_exhaustive_N)
    throw UsageError("exhaustive check is limited to N <= " + std::to_string(opts.limits.max_exhaustive_N) +
                     "; pass --sampled");
  const KatzSystem sys = build_katz(N, opts.limits);
  const DichotomyReport rep = dichotomy_check(sys, opts);
  write_output(out, dump(katz_report_to_json(rep)));
  std::ostream& info = out ? std::cout : std::cerr;
  info << "katz N=" << N << " " << (sampled ? "sampled" : "exhaustive") << ": " << rep.subsets_checked
       << " subsets checked over |X| = " << rep.family_size << ", " << rep.violations.size() << " violations\n";
  return rep.passed() ? kOk : kFailed;
}

int cmd_verify(const std::string& frame_path, const std::string& cert_path, const Tolerances& tol) {
  const FrameFamily f = load_frame(frame_path, tol);
  const SelectionCertificate cert = certificate_from_json(read_json_file(cert_path));
  const ValidationReport rep = verify_certificate(f, cert, tol);
  if (!rep.passed() && rep.failures().front().name == "frame/certificate mismatch") {
    std::cout << "frame/certificate mismatch\n";
    return kFailed;
  }
  std::cout << (rep.passed() ? "certificate verified" : "certificate REJECTED") << " (n=" << cert.schedule.n
            << ", m=" << cert.schedule.m << ")\n";
  print_report(std::cout, rep);
  if (rep.passed()) {
    std::cout << "lambda_max(T_n) = " << fmt17(cert.lambda_max()) << ", a_n = " << fmt17(cert.bound)
              << ", margin = " << fmt17(cert.margin()) << "\n";
  }
  return rep.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barrier-potential subset selection for equal-norm Parseval frames"};
  app.require_subcommand(1);
  std::vector<std::string> tol_specs;
  app.add_option("--tol", tol_specs, "Tolerance override: name=value (bare number sets 'frame')")->take_all();

  FrameSource gen_src;
  std::optional<std::string> gen_out;
  auto* gen = app.add_subcommand("gen", "Write a harmonic (or seeded modulated) frame as JSON");
  gen->add_option("--k", gen_src.k, "Ambient dimension")->required();
  gen->add_option("--N", gen_src.N, "Norm parameter (vectors have norm 1/sqrt(N))")->required();
  gen->add_option("--seed", gen_src.seed, "Seed; implies --kind modulated");
  gen->add_option("--kind", gen_src.kind, "harmonic or modulated")->check(CLI::IsMember({"harmonic", "modulated"}));
  gen->add_option("--out", gen_out, "Output path (default: stdout)");

  std::string sel_frame;
  long long sel_n = 0;
  std::optional<std::string> sel_out;
  unsigned sel_threads = 1;
  auto* sel = app.add_subcommand("select", "Select n vectors and write a certificate");
  sel->add_option("--frame", sel_frame, "Frame JSON")->required();
  sel->add_option("--n", sel_n, "Number of vectors to select (1 <= n < m)")->required();
  sel->add_option("--out", sel_out, "Certificate path (default: stdout)");
  sel->add_option("--threads", sel_threads, "Threads for the candidate scan")->check(CLI::PositiveNumber);

  FrameSource sw_src;
  long long sw_from = 1, sw_to = 0;
  std::vector<int> sw_N_list;
  std::optional<double> sw_fraction;
  std::optional<std::string> sw_out;
  unsigned sw_threads = 1;
  auto* sw = app.add_subcommand("sweep", "Run selections over a range of n or N and write CSV");
  sw->add_option("--frame", sw_src.frame_path, "Frame JSON (instead of --k/--N)");
  sw->add_option("--k", sw_src.k, "Ambient dimension of a generated frame");
  sw->add_option("--N", sw_src.N, "Norm parameter of a generated frame");
  sw->add_option("--seed", sw_src.seed, "Seed for a modulated frame");
  sw->add_option("--kind", sw_src.kind, "harmonic or modulated")->check(CLI::IsMember({"harmonic", "modulated"}));
  sw->add_option("--n-from", sw_from, "First n (inclusive)");
  sw->add_option("--n-to", sw_to, "Last n (inclusive); an empty range writes only the header");
  sw->add_option("--N-list", sw_N_list, "Comma-separated N values (generated frames)")->delimiter(',');
  sw->add_option("--fraction", sw_fraction, "Use n = round(fraction * m) instead of a range");
  sw->add_option("--out", sw_out, "CSV path (default: stdout)");
  sw->add_option("--threads", sw_threads, "Threads for the candidate scan")->check(CLI::PositiveNumber);

  int katz_N = 0;
  bool katz_sampled = false;
  std::uint64_t katz_trials = 100000, katz_seed = kDefaultSeed;
  std::optional<std::string> katz_out;
  auto* katz = app.add_subcommand("katz", "Check the Katz set-system dichotomy");
  katz->add_option("--N", katz_N, "Half the ground-set size")->required();
  katz->add_flag("--sampled", katz_sampled, "Sample subsets instead of enumerating all 2^(2N)");
  katz->add_option("--trials", katz_trials, "Samples in sampled mode");
  katz->add_option("--seed", katz_seed, "Seed in sampled mode");
  katz->add_option("--out", katz_out, "Report path (default: stdout)");

  std::string ver_frame, ver_cert;
  auto* ver = app.add_subcommand("verify", "Re-check a certificate against its frame");
  ver->add_option("--frame", ver_frame, "Frame JSON")->required();
  ver->add_option("--cert", ver_cert, "Certificate JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const Tolerances tol = parse_tolerances(tol_specs);
    if (*gen) return cmd_gen(gen_src, gen_out, tol);
    if (*sel) return cmd_select(sel_frame, sel_n, sel_out, sel_threads, tol);
    if (*sw) {
      if (!sw_src.frame_path && sw_src.k == 0) throw UsageError("sweep needs --frame or --k with --N/--N-list");
      if (!sw_src.frame_path && sw_N_list.empty() && sw_src.N == 0) throw UsageError("sweep needs --N or --N-list");
      return cmd_sweep(sw_src, sw_from, sw_to, sw_N_list, sw_fraction, sw_out, sw_threads, tol);
    }
    if (*katz) return cmd_katz(katz_N, katz_sampled, katz_trials, katz_seed, katz_out);
    if (*ver) return cmd_verify(ver_frame, ver_cert, tol);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CheckFailed& e) {
    std::cerr << "error: " << e.what();
    return kFailed;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
