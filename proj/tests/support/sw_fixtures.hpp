#pragma once

// Shapiro-Wilk reference values captured from scipy.stats.shapiro 1.15.3.

#include <string>
#include <vector>

namespace fixtures {

struct ShapiroCase {
    std::string name;
    std::vector<double> values;
    double w;
    double p;
};

inline const std::vector<ShapiroCase>& shapiro_cases() {
    static const std::vector<ShapiroCase> cases = {
        {"small_n3", {2.0, 3.5, 9.25}, 0.8972261735419629, 0.37672598358592224},
        {"n5_skew", {1.2, 1.5, 1.9, 2.4, 7.8}, 0.7043523706696602, 0.010629045822045132},
        {"n10_mixed",
         {148, 154, 158, 160, 161, 162, 166, 170, 182, 195},
         0.9080491141028906,
         0.2678575575376505},
        {"n11", {0.5, 1.1, 1.6, 2.2, 2.3, 3.0, 3.1, 3.9, 4.4, 5.8, 9.7}, 0.8778359193903448,
         0.097656837635705},
        {"normal25",
         {61.9903, 44.414,  52.9645, 66.708,  59.2373, 34.0152, 48.0214, 46.1712, 53.0698,
          52.8324, 63.0136, 54.0381, 44.3602, 56.1338, 44.8445, 32.8062, 60.4977, 50.4561,
          40.4941, 54.6404, 42.6714, 71.4477, 38.3182, 33.0211, 44.0189},
         0.9765962245625417,
         0.8104698770744042},
        {"exp30",
         {5.6504,   5.0444,   67.1695,  91.4196, 96.6346,  3.3592,   49.8039,  109.5266,
          54.6974,  147.7383, 10.1221,  125.7037, 300.8539, 226.726, 90.8527,  69.4272,
          53.5361,  13.5181,  7.3699,   133.5775, 231.581,  23.2319, 128.4953, 75.5185,
          133.6627, 46.8234,  91.7398,  18.8017,  50.8332,  5.4099},
         0.876949775597989,
         0.0024011378558359054},
    };
    return cases;
}

// A fixed draw of 30 standard normals. exp() of it is strongly skewed, the
// draw itself is not.
inline const std::vector<double>& lognormal_exponents() {
    static const std::vector<double> z = {
        0.0012,  0.2987,  -0.2741, -0.8906, -0.4547, -0.9916, 0.0601,  1.3402,
        -0.4922, -0.6205, 0.4898,  0.3569,  0.1054,  -0.9305, -0.0293, 0.6953,
        -1.3442, -0.4576, -1.9012, -1.2895, -1.8417, -0.2351, -1.2674, 0.2713,
        0.1568,  -0.1869, -2.5168, -0.5387, -0.0485, 0.1133};
    return z;
}

inline constexpr double kLognormalW = 0.7954751362601127;
inline constexpr double kLognormalP = 5.428277007285165e-05;
inline constexpr double kExponentsW = 0.9689076015896966;
inline constexpr double kExponentsP = 0.5097339208579705;

}  // namespace fixtures
