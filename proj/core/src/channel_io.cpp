#include <kronsr/channel_io.hpp>

#include <kronsr/errors.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace kronsr {
namespace {

using nlohmann::json;

json complex_list(const DenseVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back({v[i].real(), v[i].imag()});
  return a;
}

json complex_list(const std::vector<cdouble>& v) {
  json a = json::array();
  for (const auto& z : v) a.push_back({z.real(), z.imag()});
  return a;
}

json matrix(const DenseMatrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()},
          {"data", complex_list(Eigen::Map<const DenseVector>(m.data(), m.size()))}};
}

cdouble read_complex(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InvalidInput("channel json: complex numbers must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<cdouble> read_complex_vector(const json& j) {
  if (!j.is_array()) throw InvalidInput("channel json: expected an array of [re, im] pairs");
  std::vector<cdouble> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(read_complex(e));
  return out;
}

DenseVector read_vector(const json& j) {
  const auto v = read_complex_vector(j);
  DenseVector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = v[i];
  return out;
}

DenseMatrix read_matrix(const json& j, Index rows, Index cols, const char* name) {
  const Index r = j.at("rows").get<Index>();
  const Index c = j.at("cols").get<Index>();
  if (r != rows || c != cols)
    throw InvalidInput(std::string("channel json: ") + name + " is " + std::to_string(r) + "x" +
                       std::to_string(c) + ", expected " + std::to_string(rows) + "x" +
                       std::to_string(cols));
  const DenseVector data = read_vector(j.at("data"));
  if (data.size() != r * c)
    throw InvalidInput(std::string("channel json: ") + name + " data length mismatch");
  return Eigen::Map<const DenseMatrix>(data.data(), r, c);
}

}  // namespace

std::string channel_to_json(const ChannelInstance& inst, int indent) {
  const auto& g = inst.geometry;
  const auto& ch = inst.channel;
  json doc;
  doc["schema"] = kChannelSchema;
  doc["geometry"] = {{"R", g.R}, {"T", g.T}, {"L", g.L}, {"N", g.N}, {"P_BS", g.P_BS}, {"P_MS", g.P_MS}};
  doc["protocol_config"] = {
      {"K_I", inst.protocol_config.K_I},
      {"K_P", inst.protocol_config.K_P},
      {"amplitude", inst.protocol_config.amplitude == IrsAmplitude::InvSqrtN ? "inv_sqrt_n" : "inv_sqrt_l"}};
  doc["channel"] = {{"irs_aoa", ch.irs_aoa},           {"ms_aod", ch.ms_aod},
                    {"bs_aoa", ch.bs_aoa},             {"irs_aod", ch.irs_aod},
                    {"beta_ms", complex_list(ch.beta_ms)}, {"beta_bs", complex_list(ch.beta_bs)},
                    {"h_ms", matrix(ch.h_ms)},         {"h_bs", matrix(ch.h_bs)}};
  doc["protocol"] = {{"x", matrix(inst.protocol.x)}, {"theta", matrix(inst.protocol.theta)}};
  doc["model"] = {{"phi_l", matrix(inst.model.phi_l)},
                  {"phi_t", matrix(inst.model.phi_t)},
                  {"phi_r", matrix(inst.model.phi_r)},
                  {"y_tilde", complex_list(inst.model.y_tilde)},
                  {"sigma2", inst.model.sigma2}};
  return doc.dump(indent);
}

ChannelInstance channel_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("channel json: ") + e.what());
  }
  try {
    if (doc.value("schema", std::string()) != kChannelSchema)
      throw InvalidInput(std::string("channel json: expected schema ") + kChannelSchema);

    ChannelInstance inst;
    const auto& jg = doc.at("geometry");
    auto& g = inst.geometry;
    g.R = jg.at("R").get<Index>();
    g.T = jg.at("T").get<Index>();
    g.L = jg.at("L").get<Index>();
    g.N = jg.at("N").get<Index>();
    g.P_BS = jg.at("P_BS").get<Index>();
    g.P_MS = jg.at("P_MS").get<Index>();
    g.validate();

    const auto& jp = doc.at("protocol_config");
    inst.protocol_config.K_I = jp.at("K_I").get<Index>();
    inst.protocol_config.K_P = jp.at("K_P").get<Index>();
    const auto amp = jp.at("amplitude").get<std::string>();
    if (amp == "inv_sqrt_n")
      inst.protocol_config.amplitude = IrsAmplitude::InvSqrtN;
    else if (amp == "inv_sqrt_l")
      inst.protocol_config.amplitude = IrsAmplitude::InvSqrtL;
    else
      throw InvalidInput("channel json: unknown amplitude '" + amp + "'");
    inst.protocol_config.validate();
    const Index ki = inst.protocol_config.K_I;
    const Index kp = inst.protocol_config.K_P;

    const auto& jc = doc.at("channel");
    auto& ch = inst.channel;
    ch.irs_aoa = jc.at("irs_aoa").get<std::vector<Index>>();
    ch.ms_aod = jc.at("ms_aod").get<Index>();
    ch.bs_aoa = jc.at("bs_aoa").get<std::vector<Index>>();
    ch.irs_aod = jc.at("irs_aod").get<Index>();
    ch.beta_ms = read_complex_vector(jc.at("beta_ms"));
    ch.beta_bs = read_complex_vector(jc.at("beta_bs"));
    ch.h_ms = read_matrix(jc.at("h_ms"), g.L, g.T, "h_ms");
    ch.h_bs = read_matrix(jc.at("h_bs"), g.R, g.L, "h_bs");
    if (static_cast<Index>(ch.irs_aoa.size()) != g.P_MS || static_cast<Index>(ch.beta_ms.size()) != g.P_MS ||
        static_cast<Index>(ch.bs_aoa.size()) != g.P_BS || static_cast<Index>(ch.beta_bs.size()) != g.P_BS)
      throw InvalidInput("channel json: path lists do not match P_MS / P_BS");

    const auto& jpr = doc.at("protocol");
    inst.protocol.x = read_matrix(jpr.at("x"), g.T, kp, "x");
    inst.protocol.theta = read_matrix(jpr.at("theta"), g.L, ki, "theta");

    const auto& jm = doc.at("model");
    inst.model.phi_l = read_matrix(jm.at("phi_l"), ki, g.N, "phi_l");
    inst.model.phi_t = read_matrix(jm.at("phi_t"), kp, g.N, "phi_t");
    inst.model.phi_r = read_matrix(jm.at("phi_r"), g.R, g.N, "phi_r");
    inst.model.y_tilde = read_vector(jm.at("y_tilde"));
    if (inst.model.y_tilde.size() != g.R * ki * kp)
      throw InvalidInput("channel json: y_tilde length " + std::to_string(inst.model.y_tilde.size()) +
                         " != R*K_I*K_P = " + std::to_string(g.R * ki * kp));
    inst.model.sigma2 = jm.at("sigma2").get<double>();
    return inst;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("channel json: ") + e.what());
  }
}

void save_channel(const ChannelInstance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << channel_to_json(inst) << '\n';
  if (!out) throw InvalidInput("failed writing " + path.string());
}

ChannelInstance load_channel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return channel_from_json(ss.str());
}

}  // namespace kronsr
