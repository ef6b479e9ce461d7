// Writes the bundled synthetic datasets:
//
//   cricket_synthetic.csv    player,innings,notouts
//     2600 batters, exactly 97649 innings and 12695 not-outs, a non-monotone
//     not-out curve in career length, and one planted 114/265 career.
//
//   mortality_synthetic.csv  year,age,sex,mortality_rate
//     1816-1999, ages 0-85, female/male (31648 rows); Gompertz-Makeham rates
//     with multiplicative noise, planted multi-age shocks and single-age blips.
//
// Usage: make_fixtures <output-dir>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace {

constexpr std::int64_t kTotalInnings = 97649;
constexpr std::int64_t kTotalNotouts = 12695;
constexpr std::int64_t kPlantedInnings = 265;
constexpr std::int64_t kPlantedNotouts = 114;

double notout_curve(double innings) {
  const double x = std::log(innings);
  const double early = 0.07 * std::exp(-0.5 * std::pow((x - std::log(2.0)) / 0.9, 2));
  const double late = 0.05 / (1.0 + std::exp(-3.0 * (x - std::log(150.0))));
  return 0.105 + early + late;
}

void write_cricket(const std::string& path) {
  std::mt19937_64 rng(20240611);
  const std::size_t batters = 2600;
  std::vector<std::int64_t> innings(batters);
  // Career lengths: mostly short, a long tail of established players.
  std::lognormal_distribution<double> career(std::log(14.0), 1.35);
  for (auto& k : innings) k = std::clamp<std::int64_t>(std::llround(career(rng)), 1, 320);

  // Shift lengths one innings at a time until the total (with the planted
  // career) matches exactly.
  std::uniform_int_distribution<std::size_t> pick(0, batters - 1);
  std::int64_t total = std::accumulate(innings.begin(), innings.end(), kPlantedInnings);
  while (total != kTotalInnings) {
    auto& k = innings[pick(rng)];
    if (total < kTotalInnings && k < 320) {
      ++k;
      ++total;
    } else if (total > kTotalInnings && k > 1) {
      --k;
      --total;
    }
  }

  std::vector<std::int64_t> notouts(batters);
  for (std::size_t i = 0; i < batters; ++i) {
    std::binomial_distribution<std::int64_t> draw(innings[i], notout_curve(static_cast<double>(innings[i])));
    notouts[i] = draw(rng);
  }
  std::int64_t no_total = std::accumulate(notouts.begin(), notouts.end(), kPlantedNotouts);
  while (no_total != kTotalNotouts) {
    const std::size_t i = pick(rng);
    if (no_total < kTotalNotouts && notouts[i] < innings[i] && innings[i] >= 10) {
      ++notouts[i];
      ++no_total;
    } else if (no_total > kTotalNotouts && notouts[i] > 0 && innings[i] >= 10) {
      --notouts[i];
      --no_total;
    }
  }

  std::ofstream os(path);
  os << "player,innings,notouts\n";
  const std::size_t planted_at = 1234;
  for (std::size_t i = 0; i < batters; ++i) {
    if (i == planted_at) os << "Planted Tailender," << kPlantedInnings << ',' << kPlantedNotouts << '\n';
    char name[32];
    std::snprintf(name, sizeof name, "Batter %04zu", i + 1);
    os << name << ',' << innings[i] << ',' << notouts[i] << '\n';
  }
}

struct Shock {
  int first_year;
  int last_year;
  int first_age;
  int last_age;
  const char* sex;
  double log_effect;
};

// Multi-age shocks are meant to survive the (year, sex) filter; blips are
// single-age and must be removed by it.
const Shock kShocks[] = {
    {1870, 1870, 0, 9, "female", 0.45}, {1870, 1870, 0, 9, "male", 0.45},
    {1914, 1918, 18, 40, "male", 0.60}, {1918, 1918, 15, 40, "female", 0.50},
    {1940, 1940, 20, 35, "male", 0.50},
};
const Shock kBlips[] = {
    {1850, 1850, 50, 50, "female", 0.80}, {1895, 1895, 30, 30, "male", 0.80},
    {1961, 1961, 70, 70, "female", 0.80}, {1985, 1985, 5, 5, "male", 0.80},
};

double log_rate(int year, int age, bool male) {
  const double a = static_cast<double>(age);
  const double makeham = 0.0012 + 0.00004 * std::exp(0.095 * a);
  const double infant = 0.06 * std::exp(-1.2 * a);
  const double level = std::log(makeham + infant) + (male ? 0.12 : 0.0);
  return level - 0.004 * static_cast<double>(year - 1816);
}

void write_mortality(const std::string& path) {
  std::mt19937_64 rng(19141918);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::ofstream os(path);
  os << "year,age,sex,mortality_rate\n";
  char buf[64];
  for (const char* sex : {"female", "male"}) {
    const bool male = std::string(sex) == "male";
    for (int year = 1816; year <= 1999; ++year) {
      for (int age = 0; age <= 85; ++age) {
        double v = log_rate(year, age, male) + noise(rng);
        const auto apply = [&](const Shock& s) {
          if (std::string(s.sex) == sex && year >= s.first_year && year <= s.last_year && age >= s.first_age &&
              age <= s.last_age)
            v += s.log_effect;
        };
        std::for_each(std::begin(kShocks), std::end(kShocks), apply);
        std::for_each(std::begin(kBlips), std::end(kBlips), apply);
        std::snprintf(buf, sizeof buf, "%.8g", std::exp(v));
        os << year << ',' << age << ',' << sex << ',' << buf << '\n';
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  write_cricket(dir + "/cricket_synthetic.csv");
  write_mortality(dir + "/mortality_synthetic.csv");
  return 0;
}
