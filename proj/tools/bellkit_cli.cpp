// bellkit command-line front end.
#include <iostream>

#include <CLI11.hpp>

#include "cli_app.hpp"

int main(int argc, char **argv)
{
  using namespace bellkit::cli;
  CLI::App app{"bellkit: Bell inequalities, nonlocal models and quantum protocols"};
  app.require_subcommand(1);

  Request req;
  bool check = false;
  std::map<std::string, std::string> values;

  for (const auto &spec : commands()) {
    CLI::App *sub = app.add_subcommand(spec.name, spec.help);
    for (const auto &p : spec.params) {
      std::string help = p.help;
      if (!p.fallback.empty()) help += " (default " + p.fallback + ")";
      std::string type = p.type == ParamSpec::Type::integer ? "INT" : p.type == ParamSpec::Type::real ? "FLOAT" : "TEXT";
      if (!p.choices.empty()) {
        type.clear();
        for (const auto &c : p.choices) type += (type.empty() ? "{" : ",") + c;
        type += "}";
      }
      sub->add_option("--" + p.key, values[spec.name + "/" + p.key], help)->type_name(type);
    }
    sub->add_option("--seed", req.seed, "RNG seed")->capture_default_str();
    sub->add_option("--samples", req.samples, "Monte Carlo samples")->capture_default_str();
    sub->add_option("--format", req.format, "json or csv")->capture_default_str();
    sub->add_option("--out", req.out, "output file (default stdout)");
    sub->add_flag("--quiet", req.quiet, "suppress status messages");
    sub->add_flag("--check", check, "validate the request and print diagnostics only");
    sub->add_option_function<int>("--restarts", [&req](const int &r) { req.restarts = r; }, "optimizer restarts");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return static_cast<int>(Exit::validation);
  }

  req.command = app.get_subcommands().front()->get_name();
  for (const auto &spec : commands()) {
    if (spec.name != req.command) continue;
    CLI::App *sub = app.get_subcommand(spec.name);
    for (const auto &p : spec.params)
      if (sub->count("--" + p.key) > 0) req.params[p.key] = values[spec.name + "/" + p.key];
  }

  if (check) {
    const auto diags = validate(req);
    int code = 0;
    for (const auto &d : diags) {
      const bool guard = d.kind == Diagnostic::Kind::guard;
      std::cout << (guard ? "guard: " : "error: ") << d.message << "\n";
      code = std::max(code, guard ? static_cast<int>(Exit::guard) : static_cast<int>(Exit::validation));
    }
    for (const auto &d : diags)
      if (d.kind != Diagnostic::Kind::guard) code = static_cast<int>(Exit::validation);
    if (diags.empty()) std::cout << "ok\n";
    return code;
  }
  return run(req, std::cout, std::cerr);
}
