// Command-line front end: duality pipelines, builders, checks and fixtures.
// Exit codes: 0 pass, 1 check failure, 2 input error, 3 semantic error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "tdual/cover.hpp"
#include "tdual/io.hpp"

namespace fs = std::filesystem;
namespace io = tdual::io;
using io::Json;
using namespace tdual;

namespace {

constexpr int kPass = 0, kFail = 1, kInput = 2, kSemantic = 3;

struct Flags {
  std::optional<i64> level;
  std::uint64_t seed = 1;
  std::string emit_dir;
  bool json = false;
};

// Source text of every loaded document, for positioning schema errors.
struct Source {
  std::string label;
  std::string text;
};
std::vector<Source> g_sources;

struct Loaded {
  Json doc;
  std::string label;
};

Loaded load(const std::string& arg) {
  if (fs::exists(arg)) {
    auto text = io::read_file(arg);
    g_sources.push_back({arg, text});
    return {io::parse(text), arg};
  }
  if (auto f = io::fixture(arg)) {
    g_sources.push_back({arg, io::render(f->document)});
    return {f->document, arg};
  }
  throw io::SchemaError("no such file or fixture: " + arg, "");
}

int input_error(io::SchemaError e) {
  if (e.line == 0 && !e.pointer.empty() && !g_sources.empty()) {
    auto [l, c] = io::locate(g_sources.back().text, e.pointer);
    e.line = l;
    e.column = c;
  }
  std::string where = g_sources.empty() ? "" : g_sources.back().label + ": ";
  std::cerr << "tdual: input error: " << where << e.located() << "\n";
  return kInput;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const io::SchemaError& e) {
    return input_error(e);
  } catch (const CLI::Error&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "tdual: semantic error: " << e.what() << "\n";
    return kSemantic;
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

PipelineOptions pipeline_options(const Flags& fl) {
  PipelineOptions opt;
  opt.blocks.seed = fl.seed;
  return opt;
}

BundleGerbeData load_bundle(const std::string& arg, const Flags& fl) {
  auto in = load(arg);
  auto b = io::bundle_gerbe_from_json(in.doc, io::resolve_level(in.doc, fl.level));
  if (b.name.empty()) b.name = fs::path(arg).stem().string();
  return b;
}

// Content-addressed artifact files plus an index, all sorted by role.
void emit_artifacts(const std::string& dir, const std::vector<std::pair<std::string, Json>>& items) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  Json index = Json::array();
  auto sorted = items;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.first < b.first; });
  for (const auto& [role, body] : sorted) {
    const auto id = body["id"].get<std::string>();
    write_text((fs::path(dir) / (id + ".json")).string(), io::render(body));
    index.push_back({{"role", role}, {"id", id}, {"kind", body["kind"]}, {"file", id + ".json"}});
  }
  write_text((fs::path(dir) / "index.json").string(), io::render(Json{{"kind", "artifact-index"}, {"artifacts", index}}));
}

int finish(const DualityReport& r, const Flags& fl) {
  std::cout << (fl.json ? io::render(io::to_json(r)) : r.render());
  return r.ok() ? kPass : kFail;
}

std::vector<std::pair<std::string, Json>> imprimitivity_artifacts(const Imprimitivity& imp, const std::string& src) {
  return {{"bimodule", io::artifact(io::to_json(imp.data.bimodule), "imprimitivity-bimodule", {src})},
          {"twist.H", io::artifact(io::to_json(imp.psi), "gerbe-twist", {src})},
          {"twist.K", io::artifact(io::to_json(imp.chi), "restricted-twist", {src})}};
}

void merge_into(DualityReport& into, const DualityReport& part, const std::string& prefix) {
  into.checks.merge(part.checks, prefix + ".");
  for (const auto& [k, v] : part.blocks) into.blocks[prefix + "." + k] = v;
  for (const auto& [k, v] : part.k0_ranks) into.k0_ranks[prefix + "." + k] = v;
  for (auto a : part.artifacts) {
    a.step = prefix + "." + a.step;
    into.artifacts.push_back(a);
  }
  for (const auto& n : part.notes) into.notes.push_back(prefix + ": " + n);
}

// ---------------------------------------------------------------- check

Report check_document(const Json& doc, const Flags& fl) {
  const std::string kind = doc.is_object() && doc.contains("kind") && doc["kind"].is_string() ? doc["kind"].get<std::string>() : "";
  Report rep;
  rep.subject = kind + (doc.contains("name") && doc["name"].is_string() ? " " + doc["name"].get<std::string>() : "");
  if (doc.contains("id") && doc["id"].is_string()) {
    auto body = doc;
    body.erase("id");
    auto want = io::content_hash(body);
    rep.add("artifact.id", want == doc["id"], "content hash " + want);
  }
  if (kind == "groupoid") {
    rep.merge(validate_groupoid(io::groupoid_tables_from_json(doc)), "groupoid.");
  } else if (kind == "cover") {
    rep.merge(validate_groupoid(*cech_groupoid(io::cover_from_json(doc))), "groupoid.");
  } else if (kind == "group") {
    auto t = io::group_from_json(doc);
    rep.merge(validate_group(t), "group.");
  } else if (kind == "cochain") {
    auto c = io::cochain_from_json(doc, fl.level);
    rep.merge(validate_groupoid(*c.groupoid), "groupoid.");
    const bool closed = differential(c).is_zero();
    if (doc.contains("closed")) rep.add("cochain.closed", doc["closed"] == closed, closed ? "closed" : "not closed");
    rep.add("cochain.normalized", c.degree == 0 || c.normalized());
  } else if (kind == "bimodule") {
    rep.merge(verify_bimodule(io::bimodule_from_json(doc)), "bimodule.");
  } else if (kind == "algebra") {
    auto a = io::algebra_from_json(doc);
    auto r = check_star_algebra(a);
    rep.merge(r, "algebra.");
    if (r.ok()) {
      BlockOptions bo;
      bo.seed = fl.seed;
      auto bd = block_decomposition(a, bo);
      std::string sizes;
      for (int s : bd.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
      int dim = 0;
      for (int s : bd.sizes) dim += s * s;
      rep.add("algebra.blocks.dimension", dim == a.dimension(), "blocks [" + sizes + "]");
    }
  } else if (kind == "action") {
    GroupoidPtr g = doc.contains("groupoid") ? io::groupoid_from_json(doc["groupoid"], "/groupoid") : nullptr;
    if (!g) throw std::invalid_argument("an action document needs an embedded \"groupoid\" to be checked");
    rep.merge(check_action(io::action_from_json(doc, g)), "action.");
  } else if (kind == "bundle-gerbe") {
    auto b = io::bundle_gerbe_from_json(doc, io::resolve_level(doc, fl.level));
    rep.merge(validate_groupoid(*b.base()), "base.");
    rep.merge(check_bundle_gerbe(b), "gerbe.");
    auto imp = imprimitivity(b, pipeline_options(fl));
    rep.merge(imp.report.checks, "imprimitivity.");
  } else if (kind == "hilbert") {
    auto h = io::hilbert_from_json(doc, fl.level);
    rep.merge(hilbert_bimodule_check(h.groupoid, h.unitaries, h.dimension, h.level).report, "hilbert.");
  } else {
    throw io::SchemaError("unknown document kind \"" + kind + "\"", "/kind");
  }
  return rep;
}

// ---------------------------------------------------------------- build

Json build(const std::string& kind, const std::vector<std::string>& inputs, const Flags& fl) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n)
      throw io::SchemaError("build " + kind + " expects " + std::to_string(n) + " input(s)", "");
  };
  if (kind == "pair") {
    need(1);
    int n = 0;
    try {
      n = std::stoi(inputs[0]);
    } catch (...) {
      throw io::SchemaError("build pair expects an object count", "");
    }
    if (n < 1) throw std::invalid_argument("object count must be positive");
    return io::artifact(io::to_json(*pair_groupoid(n)), "pair", {inputs[0]});
  }
  need(kind == "crossed-product" ? 2 : 1);
  auto in = load(inputs[0]);
  if (kind == "cech") {
    Json cover = in.doc.value("kind", std::string()) == "bundle-gerbe" ? in.doc["base"] : in.doc;
    if (cover.value("kind", std::string()) != "cover") throw std::invalid_argument(inputs[0] + " does not describe a cover");
    return io::artifact(io::to_json(*cech_groupoid(io::cover_from_json(cover))), "cech", {inputs[0]});
  }
  if (kind == "groupoid") return io::artifact(io::to_json(*io::groupoid_from_json(in.doc)), "groupoid", {inputs[0]});
  if (kind == "crossed-product") {
    auto g = io::groupoid_from_json(in.doc);
    auto act = load(inputs[1]);
    auto a = io::action_from_json(act.doc, g);
    return io::artifact(io::to_json(*crossed_product(a)), "crossed_product", {inputs[0], inputs[1]});
  }
  if (kind == "algebra") {
    auto c = io::cochain_from_json(in.doc, fl.level);
    if (c.degree != 2) throw std::invalid_argument("an algebra twist must have degree 2");
    return io::artifact(io::to_json(twisted_algebra(c)), "twisted_algebra", {inputs[0]});
  }
  auto b = io::bundle_gerbe_from_json(in.doc, io::resolve_level(in.doc, fl.level));
  if (kind == "bundle") return io::artifact(io::to_json(*b.bundle.groupoid), "principal_bundle", {inputs[0]});
  auto opt = pipeline_options(fl);
  opt.compute_blocks = false;
  auto imp = imprimitivity(b, opt);
  if (!imp.report.ok()) throw std::invalid_argument("imprimitivity checks failed:\n" + imp.report.render());
  if (kind == "gerbe") return io::artifact(io::to_json(imp.psi), "gerbe_twist", {inputs[0]});
  if (kind == "restricted-gerbe") return io::artifact(io::to_json(imp.chi), "restricted_twist", {inputs[0]});
  if (kind == "bimodule") return io::artifact(io::to_json(imp.data.bimodule), "imprimitivity_bimodule", {inputs[0]});
  throw io::SchemaError("unknown build kind \"" + kind + "\"", "");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tdual: T-duality for equivariant gerbes on finite groupoids"};
  app.require_subcommand(1);
  Flags fl;
  i64 level = 0;
  auto* level_opt = app.add_option("--level", level, "torus level L (values in (1/L)Z/Z)")->check(CLI::PositiveNumber);
  app.add_option("--seed", fl.seed, "seed for randomized block decompositions");
  app.add_option("--emit-artifacts", fl.emit_dir, "directory for content-addressed artifacts");
  app.add_flag("--json", fl.json, "machine-readable output");
  app.fallthrough();

  std::string input;
  int point = 0;
  auto add_pipeline = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("input", input, "bundle-gerbe document or fixture id")->required();
    return s;
  };
  auto* cmd_classical = add_pipeline("classical", "classical T-dual of an abelian gerbe");
  auto* cmd_nonabelian = add_pipeline("nonabelian", "nonabelian T-dual (N-gerbe with its canonical module)");
  auto* cmd_roundtrip = add_pipeline("roundtrip", "dualize and reconstruct the input up to Morita equivalence");
  auto* cmd_fiber = add_pipeline("fiber", "the dual fiber over a base point");
  cmd_fiber->add_option("--point", point, "base point")->required();
  auto* cmd_obstruction = add_pipeline("obstruction", "Mackey obstruction classes on the isotropy of the dual");

  std::string build_kind, out_path;
  std::vector<std::string> build_inputs;
  auto* cmd_build = app.add_subcommand("build", "construct an artifact");
  cmd_build->add_option("kind", build_kind, "cech, pair, groupoid, crossed-product, bundle, gerbe, restricted-gerbe, bimodule, algebra")
      ->required();
  cmd_build->add_option("inputs", build_inputs, "input documents, fixture ids, or an object count for pair");
  cmd_build->add_option("-o,--output", out_path, "output file (default stdout)");

  std::vector<std::string> check_inputs;
  auto* cmd_check = app.add_subcommand("check", "validate documents or fixtures");
  cmd_check->add_option("inputs", check_inputs, "documents or fixture ids")->required();

  std::string write_dir;
  auto* cmd_fixtures = app.add_subcommand("fixtures", "list the shipped fixtures");
  cmd_fixtures->add_option("--write", write_dir, "write every fixture to DIR/<id>.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kInput;
  }
  if (*level_opt) fl.level = level;

  return guarded([&]() -> int {
    if (*cmd_classical) {
      auto b = load_bundle(input, fl);
      auto cd = classical_tdualize(b, pipeline_options(fl));
      auto items = imprimitivity_artifacts(cd.steps, input);
      items.push_back({"dual", io::artifact(io::to_json(cd.dual), "classical_tdualize", {input})});
      emit_artifacts(fl.emit_dir, items);
      return finish(cd.report, fl);
    }
    if (*cmd_nonabelian) {
      auto b = load_bundle(input, fl);
      auto nd = nonabelian_tdualize(b, pipeline_options(fl));
      auto items = imprimitivity_artifacts(nd.imp, input);
      items.push_back({"module", io::artifact(io::to_json(nd.module.module), "canonical_module", {input})});
      emit_artifacts(fl.emit_dir, items);
      return finish(nd.report, fl);
    }
    if (*cmd_roundtrip) {
      auto b = load_bundle(input, fl);
      auto opt = pipeline_options(fl);
      auto nd = nonabelian_tdualize(b, opt);
      DualityReport r;
      r.kind = "roundtrip";
      r.subject = b.name;
      r.level = b.level();
      r.seed = fl.seed;
      merge_into(r, nd.report, "nonabelian");
      merge_into(r, takai_reconstruct(nd, opt), "takai");
      auto items = imprimitivity_artifacts(nd.imp, input);
      if (b.group->is_abelian() && b.cocycle.beta.is_zero() && b.level() % b.group->exponent() == 0) {
        auto dd = classical_double_dual(b, opt);
        merge_into(r, dd.report, "double");
        items.push_back({"dual", io::artifact(io::to_json(dd.first.dual), "classical_tdualize", {input})});
        items.push_back({"double-dual", io::artifact(io::to_json(dd.second.dual), "classical_tdualize", {input})});
      } else {
        r.notes.push_back("classical double dual skipped: needs abelian G, vanishing beta and a level divisible by the exponent");
      }
      emit_artifacts(fl.emit_dir, items);
      return finish(r, fl);
    }
    if (*cmd_fiber) {
      auto b = load_bundle(input, fl);
      auto opt = pipeline_options(fl);
      auto fa = fiber_analysis(nonabelian_tdualize(b, opt), point, opt);
      emit_artifacts(fl.emit_dir, {{"fiber-twist", io::artifact(io::to_json(fa.group_twist), "fiber_twist", {input})}});
      return finish(fa.report, fl);
    }
    if (*cmd_obstruction) {
      auto b = load_bundle(input, fl);
      auto mo = mackey_obstruction(nonabelian_tdualize(b, pipeline_options(fl)));
      std::vector<std::pair<std::string, Json>> items;
      for (const auto& p : mo.points)
        items.push_back({"restricted." + std::to_string(p.object), io::artifact(io::to_json(p.restricted), "isotropy_restriction", {input})});
      emit_artifacts(fl.emit_dir, items);
      return finish(mo.report, fl);
    }
    if (*cmd_build) {
      auto art = build(build_kind, build_inputs, fl);
      write_text(out_path, io::render(art));
      return kPass;
    }
    if (*cmd_check) {
      bool ok = true;
      Json all = Json::array();
      for (const auto& arg : check_inputs) {
        auto in = load(arg);
        auto rep = check_document(in.doc, fl);
        if (rep.subject.empty() || rep.subject.back() == ' ') rep.subject += arg;
        ok = ok && rep.ok();
        if (fl.json)
          all.push_back(io::to_json(rep));
        else
          std::cout << arg << ": " << rep.render();
      }
      if (fl.json) std::cout << io::render(all);
      return ok ? kPass : kFail;
    }
    if (*cmd_fixtures) {
      Json list = Json::array();
      for (const auto& f : io::fixtures()) {
        if (!write_dir.empty()) {
          fs::create_directories(write_dir);
          write_text((fs::path(write_dir) / (f.id + ".json")).string(), io::render(f.document));
        }
        if (fl.json)
          list.push_back({{"id", f.id}, {"description", f.description}, {"negative", f.negative},
                          {"hash", io::content_hash(f.document)}});
        else
          std::cout << f.id << (f.negative ? " [negative]" : "") << "  " << f.description << "\n";
      }
      if (fl.json) std::cout << io::render(list);
      return kPass;
    }
    return kInput;
  });
}
