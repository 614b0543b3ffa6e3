#include "ncfa/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ncfa::io {

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a matrix (array of arrays)");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Eigen::MatrixXi biadjacency_from_json(const json& j, int n) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXi b(rows, n);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("biadjacency row width does not match n");
    for (int c = 0; c < n; ++c) {
      const int v = row.at(static_cast<std::size_t>(c)).get<int>();
      if (v != 0 && v != 1)
        throw std::invalid_argument("biadjacency entries must be 0 or 1");
      b(i, c) = v;
    }
  }
  return b;
}

json biadjacency_to_json(const Eigen::MatrixXi& b) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j2 = 0; j2 < b.cols(); ++j2) row.push_back(b(i, j2));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json udg_to_json(const UndirectedGraph& g) {
  json j;
  j["n"] = g.n();
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back(json::array({a, b}));
  j["edges"] = std::move(edges);
  return j;
}

UndirectedGraph udg_from_json(const json& j) {
  UndirectedGraph g(j.at("n").get<int>());
  for (const auto& e : j.at("edges"))
    g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

json mcm_to_json(const MCMGraph& g) {
  json j;
  j["n"] = g.n();
  j["biadjacency"] = biadjacency_to_json(g.biadjacency);
  return j;
}

MCMGraph mcm_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  MCMGraph g{biadjacency_from_json(j.at("biadjacency"), n)};
  for (Eigen::Index i = 0; i < g.biadjacency.rows(); ++i)
    if (g.biadjacency.row(i).sum() == 0)
      throw std::invalid_argument("biadjacency has an all-zero row");
  return g;
}

json ncfa_to_json(const NCFAGraph& g) {
  json j = mcm_to_json(g.mcm);
  j["multiplicities"] = g.multiplicities;
  return j;
}

NCFAGraph ncfa_from_json(const json& j) {
  NCFAGraph g;
  g.mcm = mcm_from_json(j);
  g.multiplicities = j.at("multiplicities").get<std::vector<int>>();
  if (static_cast<int>(g.multiplicities.size()) != g.mcm.latent_count())
    throw std::invalid_argument("multiplicity count does not match latent count");
  g.lambda = 0;
  for (int k : g.multiplicities) {
    if (k < 1) throw std::invalid_argument("multiplicities must be positive");
    g.lambda += k;
  }
  return g;
}

json ground_truth_to_json(const synth::GroundTruth& gt) {
  json j = mcm_to_json(gt.mcm);
  j["weights"] = matrix_to_json(gt.weights);
  return j;
}

synth::GroundTruth ground_truth_from_json(const json& j) {
  synth::GroundTruth gt;
  gt.mcm = mcm_from_json(j);
  gt.weights = matrix_from_json(j.at("weights"));
  if (gt.weights.rows() != gt.mcm.biadjacency.rows() ||
      gt.weights.cols() != gt.mcm.biadjacency.cols())
    throw std::invalid_argument("weights shape does not match biadjacency");
  gt.udg = udg_of_mcm(gt.mcm);
  gt.noise_variances = Eigen::VectorXd::Ones(gt.mcm.n());
  return gt;
}

json model_to_json(const vae::VAEParams& params, const vae::TrainConfig& config) {
  json j;
  json mask = json::array();
  for (Eigen::Index i = 0; i < params.mask.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < params.mask.cols(); ++c)
      row.push_back(static_cast<int>(params.mask(i, c)));
    mask.push_back(std::move(row));
  }
  j["mask"] = std::move(mask);
  j["enc_weight"] = matrix_to_json(params.enc_weight);
  j["enc_bias"] = vector_to_json(params.enc_bias);
  j["enc_logvar_weight"] = matrix_to_json(params.enc_logvar_weight);
  j["enc_logvar_bias"] = vector_to_json(params.enc_logvar_bias);
  j["dec_weight"] = matrix_to_json(params.dec_weight);
  j["dec_bias"] = vector_to_json(params.dec_bias);
  j["obs_lognoise"] = vector_to_json(params.obs_lognoise);
  j["config"] = {{"epochs", config.epochs},
                 {"learning_rate", config.learning_rate},
                 {"beta1", config.beta1},
                 {"beta2", config.beta2},
                 {"eps", config.eps},
                 {"weight_decay", config.weight_decay},
                 {"batch_size", config.batch_size},
                 {"split_fraction", config.split_fraction},
                 {"seed", config.seed}};
  return j;
}

vae::VAEParams model_from_json(const json& j, vae::TrainConfig* config) {
  vae::VAEParams p;
  p.mask = matrix_from_json(j.at("mask"));
  p.enc_weight = matrix_from_json(j.at("enc_weight"));
  p.enc_bias = vector_from_json(j.at("enc_bias"));
  p.enc_logvar_weight = matrix_from_json(j.at("enc_logvar_weight"));
  p.enc_logvar_bias = vector_from_json(j.at("enc_logvar_bias"));
  p.dec_weight = matrix_from_json(j.at("dec_weight"));
  p.dec_bias = vector_from_json(j.at("dec_bias"));
  p.obs_lognoise = vector_from_json(j.at("obs_lognoise"));
  if (config && j.contains("config")) {
    const auto& c = j.at("config");
    config->epochs = c.at("epochs").get<int>();
    config->learning_rate = c.at("learning_rate").get<double>();
    config->beta1 = c.at("beta1").get<double>();
    config->beta2 = c.at("beta2").get<double>();
    config->eps = c.at("eps").get<double>();
    config->weight_decay = c.at("weight_decay").get<double>();
    config->batch_size = c.at("batch_size").get<int>();
    config->split_fraction = c.at("split_fraction").get<double>();
    config->seed = c.at("seed").get<std::uint64_t>();
  }
  return p;
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + path);
  out << content;
}

json read_json_file(const std::string& path) {
  return json::parse(read_text_file(path));
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, canonical_dump(j));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

indep::SampleMatrix read_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur.push_back(ch);
      }
    }
    fields.push_back(cur);
    return fields;
  };

  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto fields = split(line);
    if (first && header) {
      names = fields;
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      std::size_t consumed = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &consumed);
      } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric CSV field: '" + f + "'");
      }
      while (consumed < f.size() && std::isspace(static_cast<unsigned char>(f[consumed])))
        ++consumed;
      if (consumed != f.size())
        throw std::invalid_argument("non-numeric CSV field: '" + f + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("ragged CSV rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("CSV has no data rows");
  if (!names.empty() && names.size() != rows.front().size())
    throw std::invalid_argument("CSV header width does not match data");

  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return indep::SampleMatrix(std::move(data), std::move(names));
}

void write_csv(const std::string& path, const indep::SampleMatrix& sample) {
  std::ostringstream out;
  for (int c = 0; c < sample.n(); ++c) {
    if (c) out << ',';
    if (sample.names.empty())
      out << 'M' << (c + 1);
    else
      out << sample.names[static_cast<std::size_t>(c)];
  }
  out << '\n';
  for (int r = 0; r < sample.s(); ++r) {
    for (int c = 0; c < sample.n(); ++c) {
      if (c) out << ',';
      out << format_double(sample.data(r, c));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_trace_csv(const std::string& path, const vae::TrainTrace& trace) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < trace.train_loss.size(); ++e) {
    out << (e + 1) << ',' << format_double(trace.train_loss[e]) << ','
        << format_double(trace.val_loss[e]) << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace ncfa::io
