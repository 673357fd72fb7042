#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "twofluid/cases.hpp"

using namespace twofluid;

TEST(Ransom, InletAndInitialState) {
  const CaseSpec c = load_case("ransom");
  EXPECT_EQ(c.bc.inlet.u_l, 10.0);
  EXPECT_EQ(c.bc.inlet.u_v, 0.0);
  EXPECT_EQ(c.bc.inlet.alpha_v, 0.2);
  EXPECT_EQ(c.mesh.n, 100);
  const TwoFluidModel m = c.model();
  for (const auto& s : c.initial_field(m)) EXPECT_NEAR(s.prim.alpha_v, 0.2, 1e-15);
}

TEST(Ransom, OracleFrontKinematics) {
  RansomOracle o;
  EXPECT_NEAR(o.front(0.6), 10.0 * 0.6 + 0.5 * 9.81 * 0.36, 1e-12);
  EXPECT_NEAR(o.front(0.6), 7.766, 1e-3);
  // below the front the liquid jet thins: alpha_v = 1 - 0.8 * 10 / sqrt(100 + 2 g y)
  const double y = 4.0;
  EXPECT_NEAR(o.alpha_v(y, 0.6), 1.0 - 0.8 * 10.0 / std::sqrt(100.0 + 2.0 * 9.81 * y), 1e-14);
  EXPECT_EQ(o.alpha_v(10.0, 0.6), 0.2);
  EXPECT_EQ(o.alpha_v(0.0, 0.0), 0.2);
}

TEST(Ransom, NoGravityNoStriction) {
  RansomOracle o;
  o.g = 0.0;
  for (double y : {0.5, 3.0, 9.0}) EXPECT_NEAR(o.alpha_v(y, 0.6), 0.2, 1e-15);
}

TEST(Channel, InletVelocities) {
  for (const char* name : {"channel_saturated", "channel_subcooled"}) {
    const CaseSpec c = load_case(name);
    EXPECT_EQ(c.bc.inlet.u_v, 0.7802) << name;
    EXPECT_EQ(c.bc.inlet.u_l, 0.7802) << name;
    EXPECT_EQ(c.mesh.n, 150) << name;
  }
}

TEST(Channel, SubcooledInletEnthalpy) {
  const CaseSpec sat = load_case("channel_saturated");
  const CaseSpec sub = load_case("channel_subcooled");
  EXPECT_EQ(sub.bc.inlet.h_l, 1029e3);
  EXPECT_NEAR(sat.bc.inlet.h_l - sub.bc.inlet.h_l, 233e3, 1.0);
}

TEST(Channel, HeatingRateFormula) {
  const SaturationState s{2.784e6, 1.262e6, 35.90, 739.6};
  const double v_lv = 1.0 / 35.90 - 1.0 / 739.6;
  const double q = channel_heating_rate(10.0, 0.7802, 3.65, s);
  EXPECT_NEAR(q, 10.0 * 0.7802 * (2.784e6 - 1.262e6) / (3.65 * v_lv), 1e-6 * q);
  EXPECT_GT(q, 0.0);
  EXPECT_NEAR(channel_heating_rate(20.0, 0.7802, 3.65, s), 2.0 * q, 1e-9 * q);
  const CaseSpec c = load_case("channel_saturated");
  EXPECT_NEAR(channel_heating_rate(c), q, 1e-9 * q);
  EXPECT_NEAR(c.src.heat_rate, q, 1e-9 * q);
}

TEST(Channel, BoilingOnset) {
  const double y = boiling_onset(1.262e6, 1.029e6, 800.0, 0.78, 1.2e8);
  EXPECT_NEAR(y, 233e3 * 800.0 * 0.78 / 1.2e8, 1e-12);
  EXPECT_NEAR(boiling_onset(1.262e6, 1.029e6, 800.0, 0.78, 0.6e8), 2.0 * y, 1e-12);
  try {
    boiling_onset(1.262e6, 1.262e6, 800.0, 0.78, 1.2e8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SaturatedInlet);
  }
  EXPECT_THROW(boiling_onset(1.262e6, 1.0e6, 800.0, 0.78, 0.0), Error);
}

TEST(Channel, SubcooledOracleNearReference) {
  const CaseSpec c = load_case("channel_subcooled");
  const double y = boiling_onset_oracle(c);
  const double rho = c.liquid.density(c.operating_p, c.bc.inlet.h_l);
  EXPECT_NEAR(y, (1.262e6 - 1.029e6) * rho * 0.7802 / channel_heating_rate(c), 1e-12);
  EXPECT_GT(y, 1.0);
  EXPECT_LT(y, 1.4);
  EXPECT_THROW(boiling_onset_oracle(load_case("channel_saturated")), Error);
}

TEST(Channel, HydrostaticInitialPressure) {
  const CaseSpec c = load_case("channel_saturated");
  const TwoFluidModel m = c.model();
  const Field f = c.initial_field(m);
  EXPECT_GT(f.front().prim.p, f.back().prim.p);
  EXPECT_LT(std::abs(f.back().prim.p - c.bc.p_outlet), 1e3);
}

TEST(Cases, UnknownName) {
  try {
    load_case("tee_junction");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownCase);
  }
}

TEST(Cases, SchemeNames) {
  EXPECT_EQ(variant_from_string("exact"), Variant::Exact);
  EXPECT_EQ(variant_from_string("phdd_pos"), Variant::PHDD);
  EXPECT_EQ(variant_from_string("tanh"), Variant::Tanh);
  EXPECT_THROW(variant_from_string("weno"), Error);
  Config cfg = load_case_config("channel_subcooled");
  EXPECT_TRUE(case_from_config(cfg).ctl.positivity);
  cfg.set("scheme", "phdd");
  cfg.set("control.positivity", "false");
  EXPECT_FALSE(case_from_config(cfg).ctl.positivity);
}

TEST(Cases, BadValuesRejected) {
  Config cfg = load_case_config("channel_saturated");
  cfg.set("source.saturation", "somewhere");
  EXPECT_THROW(case_from_config(cfg), Error);
  Config c2 = load_case_config("ransom");
  c2.set("mesh.cells", "2");
  EXPECT_THROW(case_from_config(c2), Error);
  Config c3 = load_case_config("ransom");
  c3.set("vapor.law", "van_der_waals");
  EXPECT_THROW(case_from_config(c3), Error);
}

TEST(Cases, LoadFromPath) {
  const std::string path = ::testing::TempDir() + "tiny.cfg";
  {
    std::ifstream in(case_directory() + "/ransom.cfg");
    std::ofstream out(path);
    std::string line;
    while (std::getline(in, line)) out << (line.rfind("mesh.cells", 0) == 0 ? "mesh.cells = 20" : line) << '\n';
  }
  const CaseSpec c = load_case(path);
  EXPECT_EQ(c.mesh.n, 20);
  EXPECT_EQ(c.name, "ransom");
}

TEST(Config, ParseErrors) {
  std::istringstream dup("a = 1\na = 2\n");
  EXPECT_THROW(Config::parse(dup), Error);
  std::istringstream noeq("just words\n");
  EXPECT_THROW(Config::parse(noeq), Error);
  std::istringstream ok("a = 1.5  # comment\nb = yes\nc = 1 2 3\n");
  const Config c = Config::parse(ok);
  EXPECT_EQ(c.num("a"), 1.5);
  EXPECT_TRUE(c.flag("b", false));
  EXPECT_EQ(c.numbers("c").size(), 3u);
  EXPECT_THROW(c.integer("a"), Error);
  EXPECT_THROW(c.str("missing"), Error);
}
