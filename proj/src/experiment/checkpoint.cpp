#include "tonalexp/experiment/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tonalexp::experiment {

namespace {

constexpr const char* kMagic = "tonalexp-checkpoint";

void write_tensor(std::ofstream& out, const Matrix& tensor) {
  out.write(reinterpret_cast<const char*>(tensor.data()),
            static_cast<std::streamsize>(sizeof(double)) * tensor.size());
}

Matrix read_tensor(std::ifstream& in, Index rows, Index cols,
                   const std::filesystem::path& path) {
  Matrix tensor(rows, cols);
  in.read(reinterpret_cast<char*>(tensor.data()),
          static_cast<std::streamsize>(sizeof(double)) * tensor.size());
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  return tensor;
}

} // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const rnn::CellParams& params,
                     const trainer::OptimizerState* optimizer,
                     const std::string& manifest_ref) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());

  out << kMagic << " 1\n";
  out << "kind " << rnn::to_string(params.kind) << "\n";
  out << "input " << params.input_size << "\n";
  out << "hidden " << params.hidden_size << "\n";
  out << "manifest " << (manifest_ref.empty() ? "-" : manifest_ref) << "\n";
  out << "opt_state " << (optimizer ? 1 : 0) << "\n";
  out << "tensors " << params.tensors.size() << "\n";
  for (size_t i = 0; i < params.tensors.size(); ++i)
    out << params.names[i] << " " << params.tensors[i].rows() << " "
        << params.tensors[i].cols() << "\n";
  out << "DATA\n";
  for (const Matrix& t : params.tensors) write_tensor(out, t);
  if (optimizer)
    for (const Matrix& t : optimizer->acc) write_tensor(out, t);
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());

  auto next_line = [&](const std::string& what) {
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error(path.string() + ": missing " + what);
    return line;
  };

  std::istringstream magic(next_line("header"));
  std::string tag;
  int version = 0;
  magic >> tag >> version;
  if (tag != kMagic)
    throw std::runtime_error(path.string() + " is not a checkpoint file");
  if (version != 1)
    throw std::runtime_error(path.string() + ": unsupported version " +
                             std::to_string(version));

  Checkpoint ckpt;
  ckpt.version = version;

  std::string kind_name;
  Index input = 0, hidden = 0;
  int has_opt = 0;
  size_t n_tensors = 0;
  std::string manifest;

  for (const char* field : {"kind", "input", "hidden", "manifest", "opt_state",
                            "tensors"}) {
    std::istringstream line(next_line(field));
    std::string key;
    line >> key;
    if (key != field)
      throw std::runtime_error(path.string() + ": expected '" + field +
                               "', found '" + key + "'");
    if (key == "kind") line >> kind_name;
    else if (key == "input") line >> input;
    else if (key == "hidden") line >> hidden;
    else if (key == "manifest") line >> manifest;
    else if (key == "opt_state") line >> has_opt;
    else line >> n_tensors;
    if (!line) throw std::runtime_error(path.string() + ": malformed " + key);
  }

  ckpt.manifest_ref = manifest == "-" ? "" : manifest;
  ckpt.params.kind = rnn::cell_kind_from_string(kind_name);
  ckpt.params.input_size = input;
  ckpt.params.hidden_size = hidden;

  std::vector<std::pair<Index, Index>> shapes;
  for (size_t i = 0; i < n_tensors; ++i) {
    std::istringstream line(next_line("tensor directory"));
    std::string name;
    Index rows = 0, cols = 0;
    if (!(line >> name >> rows >> cols))
      throw std::runtime_error(path.string() + ": malformed tensor entry");
    ckpt.params.names.push_back(name);
    shapes.emplace_back(rows, cols);
  }
  if (next_line("DATA marker") != "DATA")
    throw std::runtime_error(path.string() + ": missing DATA marker");

  const auto layout =
      rnn::tensor_layout(ckpt.params.kind, input, hidden);
  if (layout.size() != n_tensors)
    throw std::runtime_error(path.string() + ": tensor count does not match kind");
  for (size_t i = 0; i < n_tensors; ++i)
    if (layout[i].first != ckpt.params.names[i] ||
        layout[i].second != shapes[i])
      throw std::runtime_error(path.string() + ": tensor directory mismatch at " +
                               ckpt.params.names[i]);

  for (const auto& [rows, cols] : shapes)
    ckpt.params.tensors.push_back(read_tensor(in, rows, cols, path));

  if (has_opt) {
    trainer::OptimizerState opt;
    for (const auto& [rows, cols] : shapes)
      opt.acc.push_back(read_tensor(in, rows, cols, path));
    ckpt.optimizer = std::move(opt);
  }
  return ckpt;
}

} // namespace tonalexp::experiment
