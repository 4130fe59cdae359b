#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "emod/blocks.hpp"
#include "emod/config.hpp"
#include "emod/frontend.hpp"
#include "emod/opdict.hpp"
#include "emod/pipeline.hpp"

namespace fs = std::filesystem;
using namespace emod;

namespace {

constexpr int kMissingInput = 2;

struct MissingInput {
  std::string what;
  std::string path;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> rate_hz;
  std::optional<double> noise;
  std::optional<int> repeats;
  std::optional<double> alpha;
  std::optional<int> restarts;
  std::optional<int> jobs;
  bool svg = false;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--rate-hz", rate_hz, "Power sampling rate");
    cmd->add_option("--noise", noise, "Relative noise per power sample");
    cmd->add_option("--repeats", repeats, "Idle and measured runs per case");
    cmd->add_option("--alpha", alpha, "Gradient descent step size");
    cmd->add_option("--restarts", restarts, "Random restarts of the fit");
    cmd->add_option("--jobs", jobs, "Worker threads (0: all cores)");
    cmd->add_flag("--svg", svg, "Write SVG charts with the report");
    cmd->add_option("--out", out, "Output directory");
  }

  void apply(RunConfig& c) const {
    if (seed) {
      c.seed = *seed;
      c.fit.seed = *seed;
    }
    if (rate_hz) c.rate_hz = *rate_hz;
    if (noise) c.truth.noise_sigma = *noise;
    if (repeats) c.repeats = *repeats;
    if (alpha) c.fit.alpha = *alpha;
    if (restarts) c.fit.restarts = *restarts;
    if (jobs) {
      c.jobs = *jobs;
      c.fit.jobs = *jobs;
    }
    if (svg) c.svg = true;
    if (!out.empty()) c.output_dir = out;
  }
};

void require_file(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw MissingInput{what + " not found: " + path, path};
}

bool has_ext(const std::string& path, const char* ext) { return fs::path(path).extension() == ext; }

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Config from a TOML file, or a default config around a MiniJ program.
RunConfig resolve_config(const std::string& input, const Overrides& o) {
  RunConfig c;
  if (has_ext(input, ".toml")) {
    require_file(input, "config");
    c = load_config(input);
  } else {
    c.program_path = input;
  }
  o.apply(c);
  return c;
}

Program load_program(const std::string& input) {
  RunConfig c = resolve_config(input, {});
  require_file(c.program_path, "program");
  return parse_file(c.program_path);
}

void run_stages(RunConfig config, std::initializer_list<Stage> stages) {
  if (!config.program_path.empty()) require_file(config.program_path, "program");
  Pipeline p(std::move(config));
  p.on_progress = [](const std::string& line) { std::cerr << "emod: " << line << '\n'; };
  for (Stage s : stages) p.run(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operation-level energy modeling for MiniJ programs"};
  app.require_subcommand(1);

  std::string input;
  std::string program;
  bool dump_ast = false;
  int cases = 0;
  Overrides o;

  auto* parse = app.add_subcommand("parse", "Parse and type-check a program");
  parse->add_option("program", input, "MiniJ source or config")->required();
  parse->add_flag("--dump-ast", dump_ast, "Print the AST as JSON");

  auto* blocks = app.add_subcommand("blocks", "Print the block table as JSON");
  blocks->add_option("program", input, "MiniJ source or config")->required();

  auto* dict = app.add_subcommand("dict", "Print the operation dictionary as CSV");
  dict->add_option("program", input, "MiniJ source or config")->required();

  auto* plan = app.add_subcommand("plan", "Generate the case plan");
  plan->add_option("input", input, "Config or MiniJ source")->required();
  plan->add_option("--cases", cases, "Number of cases before rank augmentation");

  auto* run = app.add_subcommand("run", "Execute the plan and write block logs");
  run->add_option("input", input, "Config or plan.json")->required();
  run->add_option("--program", program, "Program, when the input is a plan");

  auto* measure = app.add_subcommand("measure", "Simulate power traces and measure case energies");
  auto* fit = app.add_subcommand("fit", "Fit per-operation costs");
  auto* validate = app.add_subcommand("validate", "Cross-validate the fit");
  auto* report = app.add_subcommand("report", "Write the energy report");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage");
  for (auto* cmd : {measure, fit, validate, report, pipeline}) cmd->add_option("config", input, "Config file")->required();

  auto* demo = app.add_subcommand("demo", "Run the pipeline on the bundled game-loop fixture");

  for (auto* cmd : {plan, run, measure, fit, validate, report, pipeline, demo}) o.attach(cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (parse->parsed()) {
      Program p = load_program(input);
      if (dump_ast) {
        std::cout << dump_ast_json(p) << '\n';
      } else {
        std::cout << p.classes.size() << " classes, " << p.methods.size() << " methods, " << p.externs.size()
                  << " externs\n";
      }
    } else if (blocks->parsed()) {
      Program p = load_program(input);
      std::cout << blocks_to_json(p, divide_blocks(p)) << '\n';
    } else if (dict->parsed()) {
      Program p = load_program(input);
      BlockTable t = divide_blocks(p);
      std::cout << dictionary_to_csv(build_dictionary(p, t));
    } else if (plan->parsed()) {
      RunConfig c = resolve_config(input, o);
      if (cases > 0) c.cases = cases;
      std::string target;
      if (has_ext(c.output_dir, ".json")) {
        target = c.output_dir;
        c.output_dir = fs::path(target).parent_path().string();
        if (c.output_dir.empty()) c.output_dir = ".";
      }
      std::string dir = c.output_dir;
      run_stages(std::move(c), {Stage::Plan});
      if (!target.empty() && fs::path(target) != fs::path(dir) / "plan.json")
        fs::rename(fs::path(dir) / "plan.json", target);
    } else if (run->parsed()) {
      RunConfig c;
      if (has_ext(input, ".json")) {
        require_file(input, "plan");
        if (program.empty()) throw CLI::RequiredError("--program");
        c.program_path = program;
        if (o.out.empty()) c.output_dir = fs::path(input).parent_path().string();
        if (c.output_dir.empty()) c.output_dir = ".";
        o.apply(c);
        fs::path dest = fs::path(c.output_dir) / "plan.json";
        fs::create_directories(c.output_dir);
        if (!fs::exists(dest) || !fs::equivalent(input, dest)) fs::copy_file(input, dest, fs::copy_options::overwrite_existing);
      } else {
        c = resolve_config(input, o);
        if (!program.empty()) c.program_path = program;
      }
      run_stages(std::move(c), {Stage::Run});
    } else if (measure->parsed()) {
      run_stages(resolve_config(input, o), {Stage::Measure});
    } else if (fit->parsed()) {
      run_stages(resolve_config(input, o), {Stage::Fit});
    } else if (validate->parsed()) {
      run_stages(resolve_config(input, o), {Stage::Validate});
    } else if (report->parsed()) {
      run_stages(resolve_config(input, o), {Stage::Report});
    } else if (pipeline->parsed()) {
      RunConfig c = resolve_config(input, o);
      std::string out = c.output_dir;
      run_stages(std::move(c), {Stage::Parse, Stage::Blocks, Stage::Dict, Stage::Plan, Stage::Run, Stage::Measure,
                                Stage::Fit, Stage::Validate, Stage::Report});
      std::cout << "artifacts in " << out << '\n';
    } else if (demo->parsed()) {
      RunConfig c = resolve_config(std::string(EMOD_FIXTURES_DIR) + "/demo.toml", o);
      std::string out = c.output_dir;
      run_stages(std::move(c), {Stage::Parse, Stage::Blocks, Stage::Dict, Stage::Plan, Stage::Run, Stage::Measure,
                                Stage::Fit, Stage::Validate, Stage::Report});
      std::cout << read_text(out + "/metrics.csv");
      if (fs::exists(out + "/variants.csv")) std::cout << read_text(out + "/variants.csv");
      std::cout << "artifacts in " << out << '\n';
    }
  } catch (const MissingInput& e) {
    std::cerr << "emod: " << e.what << '\n';
    return kMissingInput;
  } catch (const StageError& e) {
    std::cerr << "emod: " << e.what() << '\n';
    return e.missing_path().empty() ? 1 : kMissingInput;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "emod: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
