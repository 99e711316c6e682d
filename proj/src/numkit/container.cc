#include "crosspath/numkit/container.h"

#include <bit>
#include <cstdint>

#include "crosspath/common/checksum.h"
#include "crosspath/common/errors.h"

namespace crosspath::numkit {
namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  std::string_view take(std::uint64_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw IoError("container truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Tensor* Container::find(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.tensor;
  return nullptr;
}

const Tensor& Container::get(std::string_view name) const {
  const Tensor* t = find(name);
  if (!t) throw SchemaError(std::string(name), "tensor missing from container");
  return *t;
}

std::string encode_container(const Container& c) {
  std::string out(kContainerMagic);
  put_u64(out, c.metadata.size());
  out += c.metadata;
  put_u64(out, c.tensors.size());
  for (const auto& [name, tensor] : c.tensors) {
    put_u64(out, name.size());
    out += name;
    put_u64(out, tensor.rank());
    for (std::size_t d : tensor.shape()) put_u64(out, d);
    for (double v : tensor.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Container decode_container(std::string_view bytes) {
  if (bytes.substr(0, kContainerMagic.size()) != kContainerMagic) {
    throw SchemaError("magic", "not a CROSSPATH-W1 container");
  }
  Reader r(bytes.substr(kContainerMagic.size()));
  Container c;
  c.metadata = std::string(r.take(r.u64()));
  const std::uint64_t count = r.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor nt;
    nt.name = std::string(r.take(r.u64()));
    const std::uint64_t rank = r.u64();
    if (rank > 8) throw SchemaError(nt.name, "implausible rank");
    std::vector<std::size_t> shape(rank);
    std::uint64_t n = 1;
    for (auto& d : shape) {
      d = r.u64();
      n *= d;
    }
    std::vector<double> data(n);
    for (auto& v : data) v = std::bit_cast<double>(r.u64());
    nt.tensor = Tensor(std::move(shape), std::move(data));
    c.tensors.push_back(std::move(nt));
  }
  if (!r.done()) throw SchemaError("container", "trailing bytes");
  return c;
}

void write_container(const std::filesystem::path& path, const Container& c) {
  write_file(path, encode_container(c));
}

Container read_container(const std::filesystem::path& path) {
  return decode_container(read_file(path));
}

}  // namespace crosspath::numkit
