// Frozen reference values computed by an independent numpy implementation.
#pragma once
#include <complex>

namespace oracle {
inline constexpr double conv_in[120] = {0.30471707975443135, -1.0399841062404955, 0.75045119580645725, 0.94056471639121386, -1.9510351886538364, -1.3021795068623181, 0.12784040316728537, -0.31624259234358221, -0.016801157504288795, -0.85304392757358005, 0.87939797486282856, 0.77779193542894831, 0.066030697561216045, 1.1272412069680329, 0.4675093422520456, -0.85929246288323824, 0.36875078408249884, -0.9588826008289989, 0.87845030130727253, -0.049925910986252896, -0.18486236354526056, -0.68092954440394138, 1.2225413386740303, -0.15452948206880215, -0.42832782216310722, -0.35213355048822959, 0.53230918555334872, 0.36544406436407834, 0.4127326115959884, 0.43082100300788273, 2.1416476008704612, -0.40641501638461558, -0.51224272907153734, -0.81377272824787772, 0.61597942257549565, 1.1289722927208916, -0.11394745765487507, -0.84015647696252804, -0.82448121569123956, 0.65059278782470109, 0.74325417120344228, 0.54315426830519498, -0.6655097072886943, 0.23216132306671977, 0.11668580914072822, 0.21868859672901295, 0.87142877794818985, 0.22359554877468227, 0.67891356307189488, 0.067579069488891461, 0.28911939868998415, 0.63128822583854038, -1.4571558198556664, -0.31967121635730134, -0.47037265429279551, -0.63887784824334193, -0.27514225122668373, 1.4949413112343959, -0.86583111569324323, 0.96827835459148082, -1.6828697716158048, -0.33488502998577485, 0.16275306510500559, 0.58622233135927815, 0.71122657979285497, 0.79334723519992523, -0.34872507224843757, -0.46235179266456716, 0.85797588125715385, -0.19130432488161489, -1.2756863233379219, -1.1332872140034806, -0.91945228600161133, 0.49716074405376404, 0.14242573607056525, 0.69048535406776823, -0.42725264633653426, 0.15853969107671423, 0.62559039396733673, -0.3093465397202384, 0.45677523755741145, -0.66192594106665126, -0.36305384656507178, -0.38173789399832908, -1.1958396455890397, 0.48697248078558181, -0.46940234020272387, 0.01249411872768743, 0.48074665890590895, 0.44653117602994408, 0.66538510897278624, -0.098485484509423613, -0.42329831204415375, -0.079718210906399051, -1.6873344339580298, -1.4471124724230873, -1.3226996123544024, -0.99724682760148176, 0.3997742267234366, -0.90547905536006079, -0.3781625540393897, 1.2992282977860654, -0.35626397106142593, 0.73751556846708655, -0.93361768000987699, -0.20543755786763002, -0.95002205491058123, -0.33903307590056248, 0.84030813745739552, -1.7273204231923487, 0.43442364354585733, 0.23773560233227789, -0.59414995569679441, -1.4460578543884546, 0.072129507713869515, -0.52949270906380241, 0.23267621135470395, 0.021852145523442879, 1.6017788913209154, -0.23935562747302427};
inline constexpr double conv_ker[27] = {-1.023497492621865, 0.17927563495631615, 0.21999668397176517, 1.3591875752404365, 0.83511124591457853, 0.35687105914950934, 1.4633028912195618, -1.1887630543228509, -0.63975153274974772, -0.92657594140552491, -0.38980980315576796, -1.3766861475563088, 0.63515094681440432, -0.22222269709877338, -1.4708062945026579, -1.0155790812075416, 0.31351384745019528, 0.83812656789438111, 1.9967308916917865, 2.9138624660073296, 0.41440943327599639, -0.98953812003186414, -2.1320462807313092, 0.2677114623438358, -0.81294109531032599, -0.41535726017968533, -0.61209679905980807};
inline constexpr double conv_out_s1[24] = {-3.1736797996843258, 0.41400425286722775, 0.28662826699902622, 1.5151932117116165, 0.5063532362638461, 4.2401105511104751, -4.1966567750645423, -9.1171344304644464, 2.0699759265239353, -2.1617057442860572, 3.0248588654027455, 0.95325424395869329, 1.4044232528510436, -3.693833050232882, 1.4569081017752274, -1.6108759815026581, -9.1701444400565908, 1.3084357794721706, 2.0289701554367925, 7.030797277169949, 7.3452135227369668, -2.7624537610924351, -4.2033443955797631, -1.0625986203665128};
inline constexpr double conv_out_s2[4] = {-3.1736797996843258, 0.28662826699902622, 2.0699759265239353, 3.0248588654027455};
inline constexpr int conv_in_dims[3] = {4, 5, 6};
inline constexpr int conv_out_s1_dims[3] = {2, 3, 4};
inline constexpr int conv_out_s2_dims[3] = {1, 2, 2};
struct ShSample { int n; int m; double theta; double phi; double re; double im; };
inline constexpr ShSample sh_samples[10] = {{0, 0, 0.3, 0.4, 0.28209479177387814, 0}, {1, 0, 1.1, 2.2, 0.22162820431795896, 0}, {1, 1, 1.1, 2.2, -0.18120357164890352, 0.24894164470011995}, {2, -1, 0.7, 5.1, -0.14387866713516659, -0.35241488440929669}, {2, 2, 2.0, 1.0, -0.1329089496234924, 0.29041135311154798}, {3, -3, 2.4, 0.9, 0.11624578856272588, 0.054952596020470382}, {3, 2, 0.5, 3.3, 0.19588670488617888, 0.064223024605586446}, {4, 4, 1.3, 0.2, 0.26577072018419934, 0.27364778083669511}, {5, -4, 1.9, 4.4, -0.1201389087337251, -0.36103055329483341}, {6, 1, 0.8, 2.9, 0.35721048780242537, -0.0880185909778749}};
inline constexpr double small_d1_beta07[9] = {0.88242109364224419, 0.45553069520608575, 0.11757890635775578, -0.45553069520608575, 0.76484218728448838, 0.45553069520608575, 0.11757890635775578, -0.45553069520608575, 0.88242109364224419};
inline constexpr double small_d2_beta07[25] = {0.77866698650477417, 0.56847127611596049, 0.25414462120485937, 0.075746411121730473, 0.013824799220285903, -0.56847127611596049, 0.46740466509236445, 0.60346225140879628, 0.29743752219212372, 0.075746411121730473, 0.25414462120485937, -0.60346225140879628, 0.37747535717518055, 0.60346225140879628, 0.25414462120485937, -0.075746411121730473, 0.29743752219212372, -0.60346225140879628, 0.46740466509236445, 0.56847127611596049, 0.013824799220285903, -0.075746411121730473, 0.25414462120485937, -0.56847127611596049, 0.77866698650477417};
inline constexpr double adam_scalar_after_1 = 0.49900000003333334;
inline constexpr double adam_scalar_after_2 = 0.49800000006666678;
inline constexpr double degree_scale_c7_n0 = 0.19140702448305022;
inline constexpr double degree_scale_c7_n1 = 0.19168665505505686;
inline constexpr double degree_scale_c7_n2 = 0.19168665505505642;
inline constexpr double degree_scale_c7_n3 = 0.19168665505505603;
inline constexpr double degree_scale_c7_n4 = 0.19168665505505819;
inline constexpr double degree_scale_c7_n5 = 0.19168665505505536;
}  // namespace oracle
