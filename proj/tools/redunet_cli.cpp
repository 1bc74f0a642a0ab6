// Copyright 2026 The ReduNet-CPP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: data generation, lifting, construction, forward
// evaluation, rates, nearest-subspace classification and similarity export.
//
// Exit codes: 0 success, 2 usage, 3 data or shape error, 4 numeric failure.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "redunet/redunet.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

/// Shortest round-trip decimal, independent of the C/C++ locale.
std::string num(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  redunet::require(out.good(), redunet::ErrorKind::Io, "cannot write " + path.string());
}

/// Records what a command did, written next to its primary output.
class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["version"] = redunet::kVersion;
    doc_["parameters"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::object();
  }

  template <typename T>
  void param(const std::string& key, const T& value) {
    doc_["parameters"][key] = value;
  }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const std::string& key, const fs::path& p) { doc_["inputs"][key] = p.string(); }
  void output(const std::string& key, const fs::path& p) {
    doc_["outputs"][key] = p.string();
    if (primary_.empty()) primary_ = p;
  }

  /// Writes <primary output>.manifest.json. Wall-clock time is the only
  /// field that differs between identical runs.
  void write() {
    if (primary_.empty()) return;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    doc_["wall_clock_seconds"] = secs;
    write_text(fs::path(primary_.string() + ".manifest.json"), doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  fs::path primary_;
  std::chrono::steady_clock::time_point start_;
};

redunet::FeatureMatrix read_features(const fs::path& p) {
  const redunet::Tensor t = redunet::read_tensor(p);
  redunet::require(t.ndim() == 2, redunet::ErrorKind::Shape, p.string() + ": expected an n x m feature matrix");
  return redunet::to_matrix(t);
}

/// Any batch as columns: n x m matrices are taken as is, m x ... batches
/// have every sample flattened into one column.
redunet::FeatureMatrix read_columns(const fs::path& p) {
  const redunet::Tensor t = redunet::read_tensor(p);
  if (t.ndim() == 2) return redunet::to_matrix(t);
  const auto m = static_cast<Eigen::Index>(t.extent(0));
  const auto n = static_cast<Eigen::Index>(t.size()) / std::max<Eigen::Index>(m, 1);
  return Eigen::Map<const Eigen::MatrixXd>(t.data.data(), n, m);
}

std::vector<int> read_labels(const fs::path& p) { return redunet::to_labels(redunet::read_tensor(p)); }

redunet::Membership membership_for(const std::vector<int>& labels, int classes) {
  return classes > 0 ? redunet::Membership::from_labels(labels, classes) : redunet::Membership::from_labels(labels);
}

/// Resolves --eps / --eps-sq into eps (default 0.1).
struct Precision {
  std::optional<double> eps, eps_sq;

  void add(CLI::App* cmd) {
    auto* a = cmd->add_option("--eps", eps, "Precision eps (default 0.1)")->check(CLI::PositiveNumber);
    auto* b = cmd->add_option("--eps-sq", eps_sq, "Precision given as eps^2")->check(CLI::PositiveNumber);
    a->excludes(b);
  }
  double value() const {
    if (eps_sq) return std::sqrt(*eps_sq);
    return eps.value_or(0.1);
  }
};

std::string loss_csv(const std::vector<redunet::Rates>& curve) {
  std::string out = "layer,R,Rc,dR\n";
  for (std::size_t l = 0; l < curve.size(); ++l) {
    out += std::to_string(l) + "," + num(curve[l].R) + "," + num(curve[l].Rc) + "," + num(curve[l].dR) + "\n";
  }
  return out;
}

int exit_code_for(redunet::ErrorKind kind) {
  switch (kind) {
    case redunet::ErrorKind::InvalidArgument:
      return kExitUsage;
    case redunet::ErrorKind::Numeric:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward-constructed rate-reduction networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(redunet::kVersion));
  std::function<void()> run;

  // gen-gaussians
  struct {
    int dims = 3, classes = 3, per_class = 500;
    double sigma = 0.1;
    std::uint64_t seed = 0;
    fs::path features, labels;
  } gg;
  {
    auto* c = app.add_subcommand("gen-gaussians", "Gaussian mixture projected onto the unit sphere");
    c->add_option("--dims", gg.dims, "Ambient dimension")->check(CLI::PositiveNumber);
    c->add_option("--classes", gg.classes, "Number of components")->check(CLI::PositiveNumber);
    c->add_option("--per-class", gg.per_class, "Samples per component")->check(CLI::PositiveNumber);
    c->add_option("--sigma", gg.sigma, "Per-component standard deviation")->check(CLI::PositiveNumber);
    c->add_option("--seed", gg.seed, "Random seed");
    c->add_option("--out-features", gg.features, "n x m feature tensor")->required();
    c->add_option("--out-labels", gg.labels, "Label tensor")->required();
    c->callback([&] {
      run = [&] {
        Manifest mf("gen-gaussians");
        mf.param("dims", gg.dims);
        mf.param("classes", gg.classes);
        mf.param("per_class", gg.per_class);
        mf.param("sigma", gg.sigma);
        mf.seed(gg.seed);
        redunet::GaussianMixtureSpec spec;
        spec.n = gg.dims;
        spec.k = gg.classes;
        spec.m_per_class = gg.per_class;
        spec.sigma = gg.sigma;
        spec.seed = gg.seed;
        const auto data = redunet::gen_gaussian_sphere(spec);
        redunet::write_tensor(gg.features, redunet::from_matrix(data.features));
        redunet::write_tensor(gg.labels, redunet::from_labels(data.labels));
        mf.output("features", gg.features);
        mf.output("labels", gg.labels);
        mf.write();
      };
    });
  }

  // gen-subspaces
  struct {
    int dims = 128, classes = 10, subspace_dim = 12, per_class = 100;
    bool random_bases = false, unstructured = false;
    std::uint64_t seed = 0;
    fs::path features, labels;
  } gs;
  {
    auto* c = app.add_subcommand("gen-subspaces", "Unit-sphere samples from one subspace per class");
    c->add_option("--dims", gs.dims, "Ambient dimension")->check(CLI::PositiveNumber);
    c->add_option("--classes", gs.classes, "Number of classes")->check(CLI::PositiveNumber);
    c->add_option("--subspace-dim", gs.subspace_dim, "Dimension of every class subspace")->check(CLI::PositiveNumber);
    c->add_option("--per-class", gs.per_class, "Samples per class")->check(CLI::PositiveNumber);
    c->add_flag("--random-bases", gs.random_bases, "Independent (non-orthogonal) class bases");
    c->add_flag("--gaussian", gs.unstructured, "Ignore subspaces; i.i.d. Gaussian directions");
    c->add_option("--seed", gs.seed, "Random seed");
    c->add_option("--out-features", gs.features, "n x m feature tensor")->required();
    c->add_option("--out-labels", gs.labels, "Label tensor")->required();
    c->callback([&] {
      run = [&] {
        Manifest mf("gen-subspaces");
        mf.param("dims", gs.dims);
        mf.param("classes", gs.classes);
        mf.param("subspace_dim", gs.subspace_dim);
        mf.param("per_class", gs.per_class);
        mf.param("random_bases", gs.random_bases);
        mf.param("gaussian", gs.unstructured);
        mf.seed(gs.seed);
        redunet::LabeledFeatures data;
        if (gs.unstructured) {
          data = redunet::gen_random_sphere(gs.dims, gs.classes, gs.per_class, gs.seed);
        } else {
          redunet::SubspaceSpec spec;
          spec.n = gs.dims;
          spec.k = gs.classes;
          spec.d_j.assign(static_cast<std::size_t>(gs.classes), gs.subspace_dim);
          spec.m_per_class = gs.per_class;
          spec.orthogonal = !gs.random_bases;
          spec.seed = gs.seed;
          data = redunet::gen_orthogonal_subspaces(spec);
        }
        redunet::write_tensor(gs.features, redunet::from_matrix(data.features));
        redunet::write_tensor(gs.labels, redunet::from_labels(data.labels));
        mf.output("features", gs.features);
        mf.output("labels", gs.labels);
        mf.write();
      };
    });
  }

  // rate
  struct {
    fs::path features, labels;
    int classes = 0;
    Precision precision;
  } rt;
  {
    auto* c = app.add_subcommand("rate", "Print R,Rc,dR as one CSV line");
    c->add_option("--features", rt.features, "n x m feature tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--labels", rt.labels, "Label tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--classes", rt.classes, "Class count (default: max label + 1)");
    rt.precision.add(c);
    c->callback([&] {
      run = [&] {
        const auto z = read_features(rt.features);
        const auto pi = membership_for(read_labels(rt.labels), rt.classes);
        const auto r = redunet::rate_reduction(z, pi, rt.precision.value());
        std::cout << num(r.R) << "," << num(r.Rc) << "," << num(r.dR) << "\n";
      };
    });
  }

  // construct
  struct {
    fs::path features, labels, model, features_out, loss_out;
    int layers = 10, classes = 0;
    double eta = 0.5, lambda = 500.0;
    bool check_gradient = false;
    Precision precision;
  } cs;
  {
    auto* c = app.add_subcommand("construct", "Build a dense network from labelled unit-norm features");
    c->add_option("--features", cs.features, "n x m feature tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--labels", cs.labels, "Label tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--classes", cs.classes, "Class count (default: max label + 1)");
    c->add_option("--layers", cs.layers, "Number of layers")->check(CLI::PositiveNumber);
    c->add_option("--eta", cs.eta, "Step size")->check(CLI::NonNegativeNumber);
    c->add_option("--lambda", cs.lambda, "Membership sharpness")->check(CLI::NonNegativeNumber);
    c->add_flag("--check-gradient", cs.check_gradient, "Verify label increments against the analytic gradient");
    cs.precision.add(c);
    c->add_option("--model-out", cs.model, "Model file")->required();
    c->add_option("--features-out", cs.features_out, "Output feature tensor");
    c->add_option("--loss-out", cs.loss_out, "CSV of layer,R,Rc,dR");
    c->callback([&] {
      run = [&] {
        Manifest mf("construct");
        mf.param("layers", cs.layers);
        mf.param("eta", cs.eta);
        mf.param("eps", cs.precision.value());
        mf.param("lambda", cs.lambda);
        mf.param("classes", cs.classes);
        mf.input("features", cs.features);
        mf.input("labels", cs.labels);
        const auto z = read_features(cs.features);
        const auto pi = membership_for(read_labels(cs.labels), cs.classes);
        redunet::ConstructOptions options;
        options.check_label_gradient = cs.check_gradient;
        const auto out = redunet::construct(z, pi, cs.layers, cs.eta, cs.precision.value(), cs.lambda, options);
        redunet::save_model(cs.model, out.model);
        mf.output("model", cs.model);
        if (!cs.features_out.empty()) {
          redunet::write_tensor(cs.features_out, redunet::from_matrix(out.features));
          mf.output("features", cs.features_out);
        }
        if (!cs.loss_out.empty()) {
          write_text(cs.loss_out, loss_csv(out.loss_curve));
          mf.output("loss", cs.loss_out);
        }
        mf.write();
      };
    });
  }

  // forward
  struct {
    fs::path model, features, out;
  } fw;
  {
    auto* c = app.add_subcommand("forward", "Evaluate a dense network on unit-norm features");
    c->add_option("--model", fw.model, "Model file")->required()->check(CLI::ExistingFile);
    c->add_option("--features", fw.features, "n x m feature tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--out", fw.out, "Output feature tensor")->required();
    c->callback([&] {
      run = [&] {
        Manifest mf("forward");
        mf.input("model", fw.model);
        mf.input("features", fw.features);
        const auto model = redunet::load_model(fw.model);
        redunet::write_tensor(fw.out, redunet::from_matrix(redunet::forward(model, read_features(fw.features))));
        mf.output("features", fw.out);
        mf.write();
      };
    });
  }

  // lift1d / lift2d
  struct {
    fs::path input, out;
    std::size_t channels = 20, kernel = 5;
    std::uint64_t seed = 0;
    double tau = 0.0;
    bool normalize = false;
  } lf;
  auto add_lift = [&](const std::string& name, bool two_d) {
    auto* c = app.add_subcommand(name, two_d ? "Random 2-D convolutional lifting with soft thresholding"
                                             : "Random 1-D circular lifting with soft thresholding");
    c->add_option("--input", lf.input, "m x T / m x C x T (1-D) or m x H x W / m x C x H x W (2-D) batch")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--channels", lf.channels, "Output channels")->check(CLI::PositiveNumber);
    c->add_option("--kernel", lf.kernel, "Kernel size")->check(CLI::PositiveNumber);
    c->add_option("--seed", lf.seed, "Kernel seed");
    c->add_option("--tau", lf.tau, "Soft threshold")->check(CLI::NonNegativeNumber);
    c->add_flag("--normalize", lf.normalize, "Scale every lifted sample to unit Frobenius norm");
    c->add_option("--out", lf.out, "Lifted batch")->required();
    c->callback([&, name, two_d] {
      run = [&, name, two_d] {
        Manifest mf(name);
        mf.param("channels", lf.channels);
        mf.param("kernel", lf.kernel);
        mf.param("tau", lf.tau);
        mf.param("normalize", lf.normalize);
        mf.seed(lf.seed);
        mf.input("input", lf.input);
        const auto x = redunet::read_tensor(lf.input);
        auto lifted = two_d ? redunet::lift_random_filters_2d(x, lf.channels, lf.kernel, lf.seed, lf.tau)
                            : redunet::lift_random_filters_1d(x, lf.channels, lf.kernel, lf.seed, lf.tau);
        if (lf.normalize) lifted = redunet::normalize_samples(std::move(lifted));
        redunet::write_tensor(lf.out, lifted);
        mf.output("lifted", lf.out);
        mf.write();
      };
    });
  };
  add_lift("lift1d", false);
  add_lift("lift2d", true);

  // polar
  struct {
    fs::path images, out;
    int angles = 200, radii = 15;
  } pl;
  {
    auto* c = app.add_subcommand("polar", "Resample images on a polar grid (radii become channels)");
    c->add_option("--images", pl.images, "m x H x W images")->required()->check(CLI::ExistingFile);
    c->add_option("--angles", pl.angles, "Angular samples per circle")->check(CLI::PositiveNumber);
    c->add_option("--radii", pl.radii, "Number of circles")->check(CLI::PositiveNumber);
    c->add_option("--out", pl.out, "m x radii x angles batch")->required();
    c->callback([&] {
      run = [&] {
        Manifest mf("polar");
        mf.param("angles", pl.angles);
        mf.param("radii", pl.radii);
        mf.input("images", pl.images);
        redunet::write_tensor(pl.out, redunet::polar_resample_batch(redunet::read_tensor(pl.images), pl.angles, pl.radii));
        mf.output("polar", pl.out);
        mf.write();
      };
    });
  }

  // augment
  struct {
    fs::path input, labels, out, labels_out;
    long stride = 1;
    std::string kind = "1d";
  } ag;
  {
    auto* c = app.add_subcommand("augment", "Cyclic shift augmentation at multiples of a stride");
    c->add_option("--input", ag.input, "Batch with the sample index first")->required()->check(CLI::ExistingFile);
    c->add_option("--labels", ag.labels, "Label tensor")->check(CLI::ExistingFile);
    c->add_option("--stride", ag.stride, "Shift stride")->required()->check(CLI::PositiveNumber);
    c->add_option("--kind", ag.kind, "Shift along the last axis (1d) or the last two (2d)")
        ->check(CLI::IsMember({"1d", "2d"}));
    c->add_option("--out", ag.out, "Augmented batch")->required();
    c->add_option("--labels-out", ag.labels_out, "Replicated labels");
    c->callback([&] {
      run = [&] {
        Manifest mf("augment");
        mf.param("stride", ag.stride);
        mf.param("kind", ag.kind);
        mf.input("input", ag.input);
        std::vector<int> labels;
        if (!ag.labels.empty()) {
          labels = read_labels(ag.labels);
          mf.input("labels", ag.labels);
        }
        const auto kind = ag.kind == "2d" ? redunet::ShiftKind::TwoD : redunet::ShiftKind::OneD;
        const auto aug = redunet::augment_shifts(redunet::read_tensor(ag.input), labels, ag.stride, kind);
        redunet::write_tensor(ag.out, aug.samples);
        mf.output("samples", ag.out);
        if (!ag.labels_out.empty()) {
          redunet::require(!ag.labels.empty(), redunet::ErrorKind::InvalidArgument, "--labels-out needs --labels");
          redunet::write_tensor(ag.labels_out, redunet::from_labels(aug.labels));
          mf.output("labels", ag.labels_out);
        }
        mf.param("shifts_per_sample", aug.shifts_per_sample);
        mf.write();
      };
    });
  }

  // construct-inv1d / construct-inv2d
  struct {
    fs::path input, labels, model, features_out, loss_out;
    int layers = 10, classes = 0;
    double eta = 0.5, lambda = 500.0;
    bool normalize = false;
    Precision precision;
  } ci;
  auto add_construct_inv = [&](const std::string& name, bool two_d) {
    auto* c = app.add_subcommand(name, two_d ? "Build a translation-invariant network in the frequency domain"
                                             : "Build a shift-invariant network in the frequency domain");
    c->add_option("--input", ci.input, two_d ? "m x C x H x W batch" : "m x C x T batch")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--labels", ci.labels, "Label tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--classes", ci.classes, "Class count (default: max label + 1)");
    c->add_option("--layers", ci.layers, "Number of layers")->check(CLI::PositiveNumber);
    c->add_option("--eta", ci.eta, "Step size")->check(CLI::NonNegativeNumber);
    c->add_option("--lambda", ci.lambda, "Membership sharpness")->check(CLI::NonNegativeNumber);
    c->add_flag("--normalize", ci.normalize, "Scale samples to unit Frobenius norm first");
    ci.precision.add(c);
    c->add_option("--model-out", ci.model, "Model file")->required();
    c->add_option("--features-out", ci.features_out, "Output batch");
    c->add_option("--loss-out", ci.loss_out, "CSV of layer,R,Rc,dR (shift-invariant rates)");
    c->callback([&, name, two_d] {
      run = [&, name, two_d] {
        Manifest mf(name);
        mf.param("layers", ci.layers);
        mf.param("eta", ci.eta);
        mf.param("eps", ci.precision.value());
        mf.param("lambda", ci.lambda);
        mf.param("classes", ci.classes);
        mf.param("normalize", ci.normalize);
        mf.input("input", ci.input);
        mf.input("labels", ci.labels);
        auto x = redunet::read_tensor(ci.input);
        if (ci.normalize) x = redunet::normalize_samples(std::move(x));
        const auto pi = membership_for(read_labels(ci.labels), ci.classes);
        const double eps = ci.precision.value();
        const auto out = two_d ? redunet::construct_inv2d(x, pi, ci.layers, ci.eta, eps, ci.lambda)
                               : redunet::construct_inv1d(x, pi, ci.layers, ci.eta, eps, ci.lambda);
        redunet::save_invariant_model(ci.model, out.model);
        mf.output("model", ci.model);
        if (!ci.features_out.empty()) {
          redunet::write_tensor(ci.features_out, out.features);
          mf.output("features", ci.features_out);
        }
        if (!ci.loss_out.empty()) {
          write_text(ci.loss_out, loss_csv(out.loss_curve));
          mf.output("loss", ci.loss_out);
        }
        mf.write();
      };
    });
  };
  add_construct_inv("construct-inv1d", false);
  add_construct_inv("construct-inv2d", true);

  // forward-inv1d / forward-inv2d
  struct {
    fs::path model, input, out;
    bool normalize = false;
  } fi;
  auto add_forward_inv = [&](const std::string& name, bool two_d) {
    auto* c = app.add_subcommand(name, "Evaluate an invariant network");
    c->add_option("--model", fi.model, "Model file")->required()->check(CLI::ExistingFile);
    c->add_option("--input", fi.input, two_d ? "m x C x H x W batch" : "m x C x T batch")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_flag("--normalize", fi.normalize, "Scale samples to unit Frobenius norm first");
    c->add_option("--out", fi.out, "Output batch")->required();
    c->callback([&, name, two_d] {
      run = [&, name, two_d] {
        Manifest mf(name);
        mf.param("normalize", fi.normalize);
        mf.input("model", fi.model);
        mf.input("input", fi.input);
        const auto model = redunet::load_invariant_model(fi.model);
        auto x = redunet::read_tensor(fi.input);
        if (fi.normalize) x = redunet::normalize_samples(std::move(x));
        redunet::write_tensor(fi.out, two_d ? redunet::forward_inv2d(model, x) : redunet::forward_inv1d(model, x));
        mf.output("features", fi.out);
        mf.write();
      };
    });
  };
  add_forward_inv("forward-inv1d", false);
  add_forward_inv("forward-inv2d", true);

  // nsc-fit
  struct {
    fs::path features, labels, out_dir;
    int components = redunet::kDefaultComponents, classes = 0;
  } nf;
  {
    auto* c = app.add_subcommand("nsc-fit", "Fit a nearest-subspace classifier");
    c->add_option("--features", nf.features, "n x m matrix or m x ... batch")->required()->check(CLI::ExistingFile);
    c->add_option("--labels", nf.labels, "Label tensor")->required()->check(CLI::ExistingFile);
    c->add_option("--classes", nf.classes, "Class count (default: max label + 1)");
    c->add_option("--components", nf.components, "Principal components per class")->check(CLI::PositiveNumber);
    c->add_option("--out-dir", nf.out_dir, "Classifier bundle directory")->required();
    c->callback([&] {
      run = [&] {
        Manifest mf("nsc-fit");
        mf.param("components", nf.components);
        mf.param("classes", nf.classes);
        mf.input("features", nf.features);
        mf.input("labels", nf.labels);
        const auto z = read_columns(nf.features);
        const int r = std::min<int>(nf.components, static_cast<int>(z.rows()));
        const auto clf = redunet::fit_nsc(z, read_labels(nf.labels), r, nf.classes > 0 ? nf.classes : -1);
        redunet::save_classifier(nf.out_dir, clf, nf.components);
        mf.output("bundle", nf.out_dir / "manifest.txt");
        mf.write();
      };
    });
  }

  // nsc-predict
  struct {
    fs::path model_dir, features, labels, out;
  } np;
  {
    auto* c = app.add_subcommand("nsc-predict", "Predict classes; prints accuracy when labels are given");
    c->add_option("--model-dir", np.model_dir, "Classifier bundle directory")->required()->check(CLI::ExistingDirectory);
    c->add_option("--features", np.features, "n x m matrix or m x ... batch")->required()->check(CLI::ExistingFile);
    c->add_option("--labels", np.labels, "True labels")->check(CLI::ExistingFile);
    c->add_option("--out", np.out, "Predicted label tensor");
    c->callback([&] {
      run = [&] {
        Manifest mf("nsc-predict");
        mf.input("model_dir", np.model_dir);
        mf.input("features", np.features);
        const auto clf = redunet::load_classifier(np.model_dir);
        const auto pred = redunet::predict_nsc_batch(clf, read_columns(np.features));
        if (!np.out.empty()) {
          redunet::write_tensor(np.out, redunet::from_labels(pred));
          mf.output("predictions", np.out);
        }
        if (!np.labels.empty()) {
          mf.input("labels", np.labels);
          std::cout << "accuracy," << num(redunet::accuracy(pred, read_labels(np.labels))) << "\n";
        }
        mf.write();
      };
    });
  }

  // cossim
  struct {
    fs::path features, out;
  } cm;
  {
    auto* c = app.add_subcommand("cossim", "Cosine-similarity matrix as CSV");
    c->add_option("--features", cm.features, "n x m matrix or m x ... batch")->required()->check(CLI::ExistingFile);
    c->add_option("--out", cm.out, "CSV file (default: stdout)");
    c->callback([&] {
      run = [&] {
        Manifest mf("cossim");
        mf.input("features", cm.features);
        const Eigen::MatrixXd g = redunet::cosine_similarity_matrix(read_columns(cm.features));
        std::string text;
        for (Eigen::Index i = 0; i < g.rows(); ++i) {
          for (Eigen::Index j = 0; j < g.cols(); ++j) {
            if (j) text += ',';
            text += num(g(i, j));
          }
          text += '\n';
        }
        if (cm.out.empty()) {
          std::cout << text;
        } else {
          write_text(cm.out, text);
          mf.output("similarity", cm.out);
          mf.write();
        }
      };
    });
  }

  // mnist-import
  struct {
    fs::path images, labels, out_images, out_labels;
    std::size_t limit = 0, per_class = 0;
  } mi;
  {
    auto* c = app.add_subcommand("mnist-import", "Convert IDX image/label files to tensors");
    c->add_option("--images", mi.images, "IDX image file")->required()->check(CLI::ExistingFile);
    c->add_option("--labels", mi.labels, "IDX label file")->required()->check(CLI::ExistingFile);
    c->add_option("--per-class", mi.per_class, "Keep the first N samples of every class");
    c->add_option("--limit", mi.limit, "Keep at most N samples (after the per-class filter)");
    c->add_option("--out-images", mi.out_images, "m x H x W tensor")->required();
    c->add_option("--out-labels", mi.out_labels, "Label tensor")->required();
    c->callback([&] {
      run = [&] {
        Manifest mf("mnist-import");
        mf.param("per_class", mi.per_class);
        mf.param("limit", mi.limit);
        mf.input("images", mi.images);
        mf.input("labels", mi.labels);
        const auto images = redunet::read_idx(mi.images);
        const auto labels = redunet::to_labels(redunet::read_idx(mi.labels));
        redunet::require(images.ndim() == 3 && images.extent(0) == labels.size(), redunet::ErrorKind::Shape,
                         "image and label counts differ");
        std::map<int, std::size_t> seen;
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < labels.size(); ++i) {
          if (mi.per_class && seen[labels[i]]++ >= mi.per_class) continue;
          if (mi.limit && keep.size() >= mi.limit) break;
          keep.push_back(i);
        }
        const std::size_t plane = images.extent(1) * images.extent(2);
        redunet::Tensor out({keep.size(), images.shape[1], images.shape[2]});
        std::vector<int> out_labels;
        for (std::size_t s = 0; s < keep.size(); ++s) {
          std::copy_n(images.data.begin() + static_cast<std::ptrdiff_t>(keep[s] * plane), plane,
                      out.data.begin() + static_cast<std::ptrdiff_t>(s * plane));
          out_labels.push_back(labels[keep[s]]);
        }
        redunet::write_tensor(mi.out_images, out);
        redunet::write_tensor(mi.out_labels, redunet::from_labels(out_labels));
        mf.output("images", mi.out_images);
        mf.output("labels", mi.out_labels);
        mf.write();
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    run();
  } catch (const redunet::Error& e) {
    std::cerr << "error (" << redunet::to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
