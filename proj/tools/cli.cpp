// Copyright 2026 The dimbook Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "dimbook/analyzer.hpp"
#include "dimbook/codegen.hpp"
#include "dimbook/keygen.hpp"
#include "dimbook/project.hpp"
#include "dimbook/verifier.hpp"
#include "dimbook/xlsx.hpp"
#include "json.hpp"

namespace dimbook::cli {
namespace {

namespace fs = std::filesystem;

// Carries an exit status out of a subcommand.
struct Exit {
  int status;
};

struct Loaded {
  Model model;
  Analysis analysis;
};

void print_diagnostics(const std::vector<Diagnostic>& diags, std::ostream& err) {
  for (const auto& d : diags) err << format_diagnostic(d) << "\n";
}

// Parse, bind data and analyse; diagnostics go to `err`. Exits with 1 on
// errors.
Loaded load(const std::string& path, std::ostream& err) {
  ParseResult parsed = load_model_file(path);
  if (!parsed.ok()) {
    print_diagnostics(parsed.diagnostics, err);
    throw Exit{kDiagnostics};
  }
  Analysis analysis = analyze(parsed.model);
  std::vector<Diagnostic> all = parsed.diagnostics;
  all.insert(all.end(), analysis.diagnostics.begin(), analysis.diagnostics.end());
  print_diagnostics(all, err);
  if (!analysis.ok()) throw Exit{kDiagnostics};
  return {std::move(parsed.model), std::move(analysis)};
}

// Explicit --report file, else report.cfg beside the model, else every
// Output variable.
ReportConfig report_for(const Model& model, const std::string& model_path,
                        const std::string& report_path) {
  if (!report_path.empty()) return parse_report_config(read_file(report_path));
  const fs::path beside = fs::path(model_path).parent_path() / "report.cfg";
  if (fs::exists(beside)) return parse_report_config(read_file(beside));
  return default_report_config(model);
}

int cmd_check(const std::string& path, bool json, std::ostream& out) {
  ParseResult parsed = load_model_file(path);
  std::vector<Diagnostic> diags = parsed.diagnostics;
  if (parsed.ok()) {
    const Analysis a = analyze(parsed.model);
    diags.insert(diags.end(), a.diagnostics.begin(), a.diagnostics.end());
  }
  std::size_t errors = 0, warnings = 0;
  for (const auto& d : diags) (d.severity == Severity::Error ? errors : warnings)++;
  if (json) {
    nlohmann::json j;
    j["errors"] = errors;
    j["warnings"] = warnings;
    j["diagnostics"] = nlohmann::json::array();
    for (const auto& d : diags) {
      j["diagnostics"].push_back({{"severity", d.severity == Severity::Error ? "error" : "warning"},
                                  {"code", d.code},
                                  {"message", d.message},
                                  {"file", d.span.file},
                                  {"line", d.span.line},
                                  {"column", d.span.column}});
    }
    out << j.dump(2) << "\n";
  } else {
    for (const auto& d : diags) out << format_diagnostic(d) << "\n";
    out << errors << (errors == 1 ? " error, " : " errors, ") << warnings
        << (warnings == 1 ? " warning" : " warnings") << "\n";
  }
  return errors ? kDiagnostics : kOk;
}

struct CompileOptions {
  std::string model;
  std::string output;
  std::string formula_view;
  std::string report;
  bool force = false;
  double tol = 1e-9;
};

int cmd_compile(const CompileOptions& o, std::ostream& out, std::ostream& err) {
  Loaded l = load(o.model, err);
  const ReportConfig report = report_for(l.model, o.model, o.report);
  const Workbook wb = generate_workbook(l.model, l.analysis, report);
  const WorkbookValues values = interpret_workbook(wb);
  const CheckReport check = cross_check(l.model, wb, evaluate_model(l.model), values, o.tol);
  if (!check.passed()) {
    err << report_to_text(check);
    if (!o.force) {
      err << "verification failed; nothing written (use --force to write anyway)\n";
      return kVerificationFailed;
    }
  }
  write_xlsx(o.output, wb, &values);
  out << "wrote " << o.output << " (" << wb.sheets.size() << " sheets, " << wb.names.size()
      << " names)\n";
  if (!o.formula_view.empty()) {
    write_file(o.formula_view, render_formula_view(wb));
    out << "wrote " << o.formula_view << "\n";
  }
  return check.passed() ? kOk : kVerificationFailed;
}

int cmd_eval(const std::string& path, const std::string& var, bool csv, std::ostream& out,
             std::ostream& err) {
  Loaded l = load(path, err);
  const ValueStore store = evaluate_model(l.model);
  std::vector<std::size_t> which;
  if (!var.empty()) {
    auto idx = l.model.variable_index(var);
    if (!idx) {
      err << "error: unknown variable '" << var << "'\n";
      return kUsageOrIo;
    }
    which.push_back(*idx);
  } else {
    for (std::size_t i = 0; i < l.model.variables.size(); ++i) which.push_back(i);
  }
  for (auto vi : which) {
    const Variable& v = l.model.variables[vi];
    if (csv) {
      out << values_to_csv(l.model, store, v.name);
      continue;
    }
    if (v.dimset.empty()) {
      if (which.size() > 1) out << v.name << " = ";
      out << to_display(store.values[vi][0]) << "\n";
      continue;
    }
    const auto keys = primary_key_row(l.model, v.dimset).values;
    for (std::size_t t = 0; t < keys.size(); ++t) {
      if (which.size() > 1) out << v.name << "\t";
      out << keys[t] << "\t" << to_display(store.values[vi][t]) << "\n";
    }
  }
  return kOk;
}

struct VerifyOptions {
  std::string model;
  std::string workbook;
  std::string report;
  double tol = 1e-9;
  bool json = false;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out, std::ostream& err) {
  Loaded l = load(o.model, err);
  Workbook wb = o.workbook.empty()
                    ? generate_workbook(l.model, l.analysis, report_for(l.model, o.model, o.report))
                    : parse_formula_view(read_file(o.workbook));
  const CheckReport check = cross_check(l.model, wb, o.tol);
  out << (o.json ? report_to_json(check) : report_to_text(check));
  return check.passed() ? kOk : kVerificationFailed;
}

struct ImpactOptions {
  std::string model;
  std::string dimension;
  std::optional<std::size_t> add;
  std::string remove;
  bool json = false;
};

int cmd_impact(const ImpactOptions& o, std::ostream& out, std::ostream& err) {
  Loaded l = load(o.model, err);
  auto d = l.model.dimension_index(o.dimension);
  if (!d) {
    err << "error: unknown dimension '" << o.dimension << "'\n";
    return kUsageOrIo;
  }
  const Dimension& dim = l.model.dimensions[*d];
  std::size_t count = dim.members.size();
  if (o.add) {
    count += *o.add;
  } else {
    if (!dim.member_index(o.remove)) {
      err << "error: " << dim.name << " has no member '" << o.remove << "'\n";
      return kUsageOrIo;
    }
    if (count == 1) {
      err << "error: cannot remove the last member of " << dim.name << "\n";
      return kUsageOrIo;
    }
    --count;
  }
  const ImpactReport report = impact_of_member_change(l.model, dim.name, count);
  out << (o.json ? impact_to_json(report) : impact_to_text(report));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile dimensional spreadsheet models into verified workbooks", "dimbook"};
  app.require_subcommand(1);

  std::string check_model;
  bool check_json = false;
  auto* check = app.add_subcommand("check", "Parse and analyse a model, print diagnostics");
  check->add_option("model", check_model, "Model file (.dsm)")->required();
  check->add_flag("--json", check_json, "Machine-readable output");

  CompileOptions co;
  auto* compile = app.add_subcommand("compile", "Generate a verified .xlsx workbook");
  compile->add_option("model", co.model, "Model file (.dsm)")->required();
  compile->add_option("-o,--output", co.output, "Workbook to write")->required();
  compile->add_option("--formula-view", co.formula_view, "Also write the formula view here");
  compile->add_option("--report", co.report, "Interface report configuration");
  compile->add_flag("--force", co.force, "Write even when verification fails");
  compile->add_option("--tol", co.tol, "Relative tolerance")->check(CLI::NonNegativeNumber);

  std::string eval_model, eval_var;
  bool eval_csv = false;
  auto* eval = app.add_subcommand("eval", "Evaluate the model directly");
  eval->add_option("model", eval_model, "Model file (.dsm)")->required();
  eval->add_option("--var", eval_var, "Variable to print (default: all)");
  eval->add_flag("--csv", eval_csv, "CSV with tuple columns");

  VerifyOptions vo;
  auto* verify = app.add_subcommand("verify", "Cross-check a workbook against the model");
  verify->add_option("model", vo.model, "Model file (.dsm)")->required();
  verify->add_option("--workbook", vo.workbook, "Formula view to check instead of a fresh build");
  verify->add_option("--report", vo.report, "Interface report configuration");
  verify->add_option("--tol", vo.tol, "Relative tolerance")->check(CLI::NonNegativeNumber);
  verify->add_flag("--json", vo.json, "Machine-readable output");

  ImpactOptions io;
  std::size_t add_count = 0;
  auto* impact = app.add_subcommand("impact", "Sheets affected by changing a dimension");
  impact->add_option("model", io.model, "Model file (.dsm)")->required();
  impact->add_option("--dimension", io.dimension, "Dimension name")->required();
  auto* add_opt = impact->add_option("--add", add_count, "Number of members to add");
  auto* remove_opt = impact->add_option("--remove", io.remove, "Member code to remove");
  add_opt->excludes(remove_opt);
  impact->add_flag("--json", io.json, "Machine-readable output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands()[0]) {
      err << sub->help();
    }
    return kUsageOrIo;
  }

  try {
    if (check->parsed()) return cmd_check(check_model, check_json, out);
    if (compile->parsed()) return cmd_compile(co, out, err);
    if (eval->parsed()) return cmd_eval(eval_model, eval_var, eval_csv, out, err);
    if (verify->parsed()) return cmd_verify(vo, out, err);
    if (impact->parsed()) {
      if (!*add_opt && !*remove_opt) {
        err << "error: impact needs --add N or --remove CODE\n";
        return kUsageOrIo;
      }
      if (*add_opt) io.add = add_count;
      return cmd_impact(io, out, err);
    }
  } catch (const Exit& e) {
    return e.status;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const XlsxError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const FormulaViewError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const ConfigError& e) {
    err << "error: report configuration: " << e.what() << "\n";
    return kUsageOrIo;
  } catch (const CodegenError& e) {
    err << "error: " << e.what() << "\n";
    return kDiagnostics;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kDiagnostics;
  }
  return kUsageOrIo;
}

}  // namespace dimbook::cli
