#pragma once

// Reference values frozen from scipy 1.15.3 (scipy.special.kolmogorov,
// scipy.stats.ks_2samp). Regenerate with tests/make_scipy_oracles.py.

#include <array>
#include <utility>
#include <vector>

namespace oracle {

inline const std::vector<std::pair<double, double>> kKolmogorovSf{
    {0.05, 1.0},
    {0.2, 0.999999999999495},
    {0.5, 0.9639452436648751},
    {0.8, 0.5441424115741981},
    {1.0, 0.26999967167735456},
    {1.17, 0.12939004218561884},
    {1.19, 0.11774229287977166},
    {1.5, 0.022217962616525127},
    {2.0, 0.0006709252557796953},
    {3.0, 3.045995948942526e-08},
};

inline const std::vector<double> kSmallA{-0.327, -0.974, 0.495, 0.425, -0.441, -0.1, -1.804, -0.882, 0.217, 0.596, -0.009, -0.823, -0.355, 0.525, -1.367, 1.205, -0.229, -0.805, -1.039, -1.129, 0.763, -1.355, -0.843, 0.102, -1.213, -1.155, 1.688, -0.145, -0.374, 2.149, 0.997, 0.576, 0.868, 0.568, 0.131, -2.338, 0.65, -0.139, 1.522, 0.998};
inline const std::vector<double> kSmallB{2.03, -0.083, 0.947, 1.977, -0.796, 0.238, -0.249, 0.639, 0.302, -0.019, 1.399, 1.02, 1.392, 1.191, -1.179, 0.61, -0.442, 2.276, 0.307, 1.741, 1.201, 0.548, -1.215, 0.064, 0.875, 1.546, 2.491, 0.967, 2.908, -0.039, 0.764, -0.021, -0.43, -1.638, -1.873, 2.045, -1.527, -0.63, -1.158, 0.405, -1.321, -1.236, 0.853, 0.58, -0.088, 1.83, 2.07, 0.856, -0.497, 1.201, 0.923, 3.088, 0.885, 1.442, 0.293};
inline constexpr double kSmallD = 0.29772727272727273;
inline constexpr double kSmallP = 0.025739471000624493;

inline const std::vector<double> kTiedA{2.3, -0.0, 1.8, 2.5, -0.8, -1.2, -0.9, -0.9, -0.2, -1.5, 0.7, 0.3, -1.1, -0.4, 2.2, 0.1, 0.3, 0.4, -1.6, 0.9, 1.3, -2.0, 0.6, -1.0, 0.0, -0.5, -0.3, -2.4, -1.5, 0.1, -1.1, 0.2, -0.8, -0.3, 0.7, 1.0, -0.4, 2.1, 0.0, 0.5, -0.4, -0.9, 2.5, -1.9, -1.2, 0.9, -1.6, 0.0, -0.6, -2.2, 1.2, 1.4, -0.9, -0.3, -0.5, 0.3, -0.7, 0.3, 0.9, 0.0, -0.8, 0.5, 0.6, -0.6, -0.6, -0.7, -1.0, 2.0, 0.9, -1.9, -0.5, -0.3, -1.8, 1.0, 1.0, 0.3, 0.8, -0.2, 0.6, -0.2, -0.9, 2.8, -0.8, -2.1, 1.0, 1.1, 0.8, 0.6, -1.1, -1.4, 0.8, 0.7, -0.0, 0.4, 0.9, -1.5, 1.1, -0.2, 1.1, -0.8, 0.6, 1.5, -1.1, 1.0, -1.5, -2.6, -0.4, 0.6, -1.1, -0.8, -0.7, -0.4, 1.2, 1.5, -0.5, -0.9, 0.5, 1.3, 1.5, 1.0, -0.7, 0.8, -0.4, -0.3, -0.1, -2.1, -1.7, -0.1, 0.4, 2.4, -1.2, -0.1, -0.1, -0.9, 0.1, -0.1, 0.2, -1.2, -2.9, 1.0, 0.5, -0.7, 0.6, 0.8, 0.3, 0.9, 0.0, -1.6, -0.5, 0.4, -0.5, -0.9, 0.1, -1.7, 0.4, -1.1, 0.3, -1.2, -1.0, 0.5, -1.0, -1.3, 1.7, -3.0, -0.7, 1.4, 1.0, 1.6, 0.3, -1.2, -0.2, 0.6, 0.6, 0.3, -0.7, 0.1, -1.7, 1.0, -0.5, 0.3, -1.0, 0.4, 0.9, -0.7, -1.8, -1.0, -0.4, -0.4, 0.9, -0.1, 0.1, 1.0, 0.3, -1.8, -0.2, 1.4, 0.3, -1.3, 2.0, -1.2};
inline const std::vector<double> kTiedB{0.3, 0.5, -0.6, -0.2, 1.8, 0.2, 1.9, -0.1, -0.6, 1.4, -1.3, 0.3, 1.0, -0.9, 0.8, -2.4, -0.5, 0.2, -1.7, 0.2, 0.4, -0.1, -0.8, -1.0, 1.8, 1.3, -0.4, -0.2, 1.0, -0.5, 0.1, 0.2, 0.1, -0.5, 1.9, 1.7, 1.6, 1.6, 0.5, 0.4, -1.1, 1.3, -1.1, 0.0, -0.0, 1.5, 0.4, 0.6, -0.5, -0.8, 0.0, 1.3, 0.5, 1.7, -0.2, -0.2, 1.9, -0.8, -0.6, 0.5, 0.4, -1.1, 0.5, -2.0, -1.0, -0.4, -1.5, 0.4, -0.6, 0.7, -0.6, -1.7, -0.2, 0.3, 1.4, 1.9, -0.9, -0.4, -0.3, -1.4, -1.4, 0.9, 0.1, 2.4, 0.7, -0.4, -1.1, 0.7, -1.0, -0.7, -0.5, 0.7, -0.9, 0.6, 0.8, -0.4, -1.2, -0.6, 1.7, 0.8, 2.2, 0.7, 0.3, -0.5, 0.3, 0.9, 1.7, 0.3, -0.1, 0.2, -0.2, 0.7, 2.1, -0.2, -0.3, 1.0, 0.3, -0.2, 2.6, 1.0, -1.8, -0.1, 0.8, -0.8, 1.4, 0.2, 0.6, -0.5, 0.8, -1.0, 0.8, 0.2, 0.1, 1.3, -1.0, -1.7, 1.0, -0.2, 0.6, 0.2, 0.5, -1.9, -0.1, -2.2, -0.3, 0.1, 0.5, 0.7, 0.9, 1.1};
inline constexpr double kTiedD = 0.135;
inline constexpr double kTiedP = 0.08039147035056327;

inline const std::vector<double> kShiftedA{-0.4628, 1.0535, 1.1183, 1.0387, 1.0562, -1.323, -0.4728, 0.1352, -0.4442, -0.8996, 0.2003, -0.8056, -0.6443, -1.1144, 1.1153, -0.5971, 0.7397, -1.0802, 0.4335, 0.4413, -1.3227, 0.383, 0.3629, 0.9262, -1.6087, -0.1016, 1.548, 1.8658, 0.1697, 1.3172, -0.8613, -0.2626, 0.1426, 0.0236, 0.3111, 0.3582, 1.0131, -0.2626, 0.6497, 0.2536, -1.5419, 0.4903, -0.6001, 1.3378, -0.8518, 1.0687, 1.5812, 1.5313, -0.7898, 1.0123, -0.8601, 0.6786, 0.401, 0.4179, -0.5448, 1.0918, 1.7204, 0.3485, 1.3048, -0.0302, -1.12, -0.2707, 0.6819, 0.6154, 1.0021, 0.4506, -0.6987, -1.1824, 1.5199, 0.3007, -2.2014, 0.916, 1.368, 0.4315, -0.4098, -0.7742, -1.0101, 0.0497, -2.4771, -1.0197, -2.2517, -0.8956, -0.2545, 1.624, 0.4153, 0.8709, 0.7923, 0.9523, -0.717, 1.6612, 0.7832, -0.4456, -1.4953, -0.6935, 0.93, -0.1202, -0.8272, 0.7913, -1.0434, -1.5452, 0.58, 0.6684, 0.5406, 0.5634, 0.1576, 0.6277, -0.3341, -0.2172, -0.6757, -0.8544, 0.7478, 0.2363, 0.0567, 1.4329, -1.4268, 0.5204, 0.1975, 0.171, -0.3347, 0.1053};
inline const std::vector<double> kShiftedB{1.307, 1.0545, -1.3139, -0.9419, 0.733, 0.6776, -1.0237, 0.0628, 0.1454, 0.0466, 0.1217, 0.4724, -0.6198, 1.3452, 1.295, 0.9814, 0.2515, 0.9132, 2.6804, 0.1044, 0.2038, -0.8867, 0.5871, 1.3094, 2.6788, 0.4841, 0.7335, -0.6429, 0.1155, 0.6646, 1.6148, 0.5901, 0.362, 1.6034, -0.1624, 0.5891, 1.2077, -0.2425, 0.5999, 0.452, 2.1141, -0.2377, -0.0381, -0.1463, 2.0638, 0.3991, 0.1777, 1.8605, -0.9022, 1.4622, 0.0812, -0.1684, -0.8553, -0.8062, 1.4827, -0.2309, 1.7805, -0.6038, 0.7633, -0.4222, 1.3918, 2.2379, -0.5707, 2.1216, 1.5358, 0.5798, 1.7023, 0.7264, 0.1636, 0.9143, 0.9948, 0.3668, -0.2051, 2.9234, 0.6924, -1.3098, -1.702, 2.42, 1.0153, 0.4211};
inline constexpr double kShiftedD = 0.20833333333333334;
inline constexpr double kShiftedP = 0.026290195529492483;

}  // namespace oracle

