#pragma once
// Generated by tests/oracle/oracle.py (mpmath, 40 digits). Do not edit.

namespace oracle {

inline constexpr double lambda_1_1 = 1.4142135623730950488;
inline constexpr double lambda_10_3 = 104.4030650891055018;
inline constexpr double nu_1_1 = 0.4142135623730950488;
inline constexpr double nu_h001_5 = 11.80339887498948482;
inline constexpr double norm_delta2 = 3.162277660168379332;
inline constexpr double P_0000 = 0.059683103659460750913;
inline constexpr double P_pppp_12m30_c10 = 0.23078952214521333711;
inline constexpr double P_pmpm_1122_c10 = 0.23293461658661960292;
inline constexpr double P_r_5_c10 = -0.047746482927568600731;
inline constexpr double Lplus_12_c10 = 0.23293461658661960292;
inline constexpr double Lplus_11_c10 = 0.059092181841050248429;
inline constexpr double A_12_c10 = 0.23293461658661960292;
inline constexpr double Ainv_00_c10 = -5.0768137282011058734;
inline constexpr double Ainv_01_c10 = 3.4344401520179812251;
inline constexpr double Ainv_02_c10 = 3.5160296776656570039;
inline constexpr double Ainv_10_c10 = 3.4344401520179812251;
inline constexpr double Ainv_11_c10 = -5.2276101755734159488;
inline constexpr double Ainv_12_c10 = 3.5678658348985499898;
inline constexpr double Ainv_20_c10 = 3.5160296776656570039;
inline constexpr double Ainv_21_c10 = 3.5678658348985499898;
inline constexpr double Ainv_22_c10 = -5.4789375878605994079;
inline constexpr double melnikov_delta5_x0_c10 = -0.35955528086790770983;
inline constexpr double melnikov_delta5_x1_c10 = -0.36485613603172415332;
inline constexpr double melnikov_delta5_x2_c10 = -0.37352376095772006456;
inline constexpr double psi_cos_c1 = 0.42044820762685727152;
inline constexpr double xL_2 = 1.7320508075688772935;
inline constexpr double xL_4 = 2.8284271247461900976;
inline constexpr double wilson_5_100_lo = 0.021543679154367972817;
inline constexpr double wilson_5_100_hi = 0.11175046923191913568;
inline constexpr double wilson_0_1000_hi = 0.0038267584855551232156;
inline constexpr double c_admissible_R1em2 = 106.6050498984792346;
inline constexpr double distance_R1em2_c200_s1 = 20.635104631700460642;
inline constexpr double measure_R1em2 = 0.87992254356910703014;
inline constexpr double log_eps1_1em25 = -72.723312520395276187;
inline constexpr double log_eps12_1em25 = -410.15938017182494199;
inline constexpr double eta1_1em25 = 5.9177958217514360557e-5;
inline constexpr double eta5_1em25 = 1.0355610824230685752e-8;

}  // namespace oracle
