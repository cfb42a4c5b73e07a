#include "districtsim/errors.hpp"
#include "districtsim/numfmt.hpp"
#include "districtsim/protocol.hpp"
#include "golden_frames.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

using namespace districtsim;
using namespace districtsim::protocol;

namespace {

const char* const kGoldenStep = golden::kStep;
const std::vector<std::string>& golden_frames() { return golden::frames(); }

}  // namespace

TEST(NumberFormat, ShortestRoundTrip) {
  EXPECT_EQ(format_double(900.0), "900");
  EXPECT_EQ(format_double(353.15), "353.15");
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "-0");
  EXPECT_EQ(format_double(1e300), "1e+300");
  EXPECT_THROW(format_double(std::nan("")), InvalidParameter);
  std::mt19937_64 rng(51);
  for (int i = 0; i < 10000; ++i) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof(v));
    if (!std::isfinite(v)) continue;
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(Protocol, GoldenStepBytes) {
  EXPECT_EQ(encode_message(Message::step(900.0, 900.0, {{"T_sup", 353.15}})), kGoldenStep);
}

TEST(Protocol, GoldenFramesRoundTrip) {
  for (const auto& f : golden_frames()) EXPECT_EQ(encode_message(decode_message(f)), f);
}

TEST(Protocol, DecodeFields) {
  auto m = decode_message(kGoldenStep);
  EXPECT_EQ(m.kind, Kind::step);
  EXPECT_EQ(m.t, 900.0);
  EXPECT_EQ(m.dt, 900.0);
  EXPECT_EQ(m.values.at("T_sup"), 353.15);
  auto init = decode_message(golden_frames()[1]);
  ASSERT_EQ(init.input_ports.size(), 2u);
  EXPECT_EQ(init.input_ports[0].default_value, 368.15);
  EXPECT_EQ(init.output_ports[0].name, "T_buffer");
}

TEST(Protocol, UnknownFieldsIgnored) {
  auto m = decode_message("{\"kind\":\"STEP\",\"t\":0,\"dt\":900,\"inputs\":{},\"trace\":{\"span\":[1,2]}}");
  EXPECT_EQ(m.kind, Kind::step);
  EXPECT_EQ(encode_message(m), "{\"dt\":900,\"inputs\":{},\"kind\":\"STEP\",\"t\":0}\n");
}

TEST(Protocol, TruncatedFrame) {
  const std::string f = kGoldenStep;
  for (std::size_t n = 0; n + 1 < f.size(); ++n) EXPECT_THROW(decode_message(f.substr(0, n)), DecodeError) << n;
}

TEST(Protocol, ErrorOffsets) {
  try {
    decode_message("{\"kind\":\"STEP\",\"t\":9x}");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 20u);
  }
  try {
    decode_message("{\"kind\":1}\n{}");
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 10u);
  }
}

TEST(Protocol, SemanticErrors) {
  EXPECT_THROW(decode_message("[]"), DecodeError);
  EXPECT_THROW(decode_message("{\"kind\":\"WAT\"}"), DecodeError);
  EXPECT_THROW(decode_message("{\"kind\":\"STEP\",\"t\":\"0\",\"dt\":900,\"inputs\":{}}"), DecodeError);
  EXPECT_THROW(decode_message("{\"kind\":\"STEP\",\"t\":0,\"dt\":900,\"inputs\":{\"a\":null}}"), DecodeError);
  EXPECT_THROW(decode_message("{\"kind\":\"HELLO\",\"id\":\"x\",\"version\":1.5}"), DecodeError);
  EXPECT_THROW(decode_message("{\"kind\":\"STEP\",\"t\":1e999,\"dt\":900,\"inputs\":{}}"), DecodeError);
  EXPECT_THROW(encode_message(Message::step(0.0, 900.0, {{"x", std::numeric_limits<double>::infinity()}})),
               ProtocolError);
}

TEST(Protocol, RandomMessagesRoundTrip) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> v(-1e6, 1e6);
  auto name = [&] {
    std::string s;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) s += static_cast<char>(1 + rng() % 126);
    return s;
  };
  for (int i = 0; i < 2000; ++i) {
    Message m;
    switch (rng() % 6) {
      case 0: m = Message::hello(name()); break;
      case 1: {
        cosim::SimulatorDescriptor d{"x", {{name(), name(), v(rng)}}, {{name(), name(), 0.0}}};
        m = Message::init(d, {{name(), v(rng)}});
        break;
      }
      case 2: m = Message::step(v(rng), std::abs(v(rng)), {{name(), v(rng)}, {name(), v(rng)}}); break;
      case 3: m = Message::step_ok(v(rng), {{name(), v(rng)}}); break;
      case 4: m = Message::error(name()); break;
      default: m = Message::terminate();
    }
    const std::string bytes = encode_message(m);
    EXPECT_EQ(bytes.find('\n'), bytes.size() - 1);
    EXPECT_EQ(decode_message(bytes), m);
    EXPECT_EQ(encode_message(decode_message(bytes)), bytes);
  }
}

TEST(Protocol, FuzzedFramesNeverCrash) {
  std::mt19937_64 rng(53);
  std::size_t decoded = 0, rejected = 0;
  for (int i = 0; i < 20000; ++i) {
    std::string f = golden_frames()[rng() % golden_frames().size()];
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits && !f.empty(); ++e) {
      const std::size_t pos = rng() % f.size();
      switch (rng() % 4) {
        case 0: f[pos] = static_cast<char>(rng() % 256); break;
        case 1: f.erase(pos, 1 + rng() % 4); break;
        case 2: f.insert(pos, 1, "{}[]\",:0e-\\\n"[rng() % 12]); break;
        default: f.resize(pos); break;
      }
    }
    try {
      decode_message(f);
      ++decoded;
    } catch (const DecodeError&) {
      ++rejected;
    }
  }
  EXPECT_EQ(decoded + rejected, 20000u);
  EXPECT_GT(rejected, 0u);
}
