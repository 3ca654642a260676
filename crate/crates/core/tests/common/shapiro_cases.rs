//! Shapiro-Wilk reference values computed with scipy.stats.shapiro on
//! seeded samples (normal, exponential, uniform, lognormal; rounded to 4
//! decimals).

// Sample values that happen to sit near π and friends are data, not constants.
#![allow(clippy::approx_constant)]

pub const SHAPIRO_CASES: &[(&[f64], f64, f64)] = &[
    (&[-0.2112, -0.5177, 0.1496], 0.997797688997466, 0.9103396893189961),
    (&[0.5828, 2.2195, 2.6941, 4.1245], 0.9875253618096577, 0.944475279387947),
    (
        &[0.6445, 0.1957, 0.5083, 0.6773, 0.7822],
        0.90162782414086,
        0.4189478763261567,
    ),
    (
        &[1.363, 0.5223, 0.5204, 0.3574, 0.5762, 1.2506],
        0.8023158666037219,
        0.06165619266263061,
    ),
    (
        &[0.8573, 0.2288, 0.0348, -0.8674, 0.1958, -0.8157, 0.2396],
        0.8790610579003526,
        0.22231292003353853,
    ),
    (
        &[1.0521, 0.7775, 0.4748, 0.6554, 1.1727, 1.1048, 0.2651, 0.2716],
        0.9028477160128558,
        0.3064291153779415,
    ),
    (
        &[
            0.4673, 0.9906, 0.5463, 0.0591, 0.5017, 0.4917, 0.072, 0.4327, 0.5312, 0.3642,
        ],
        0.8786601382368106,
        0.12594630130095297,
    ),
    (
        &[
            0.5425, 0.9029, 0.9118, 0.629, 0.9971, 0.6981, 2.2738, 0.5676, 1.0422, 0.7098, 1.8188,
        ],
        0.7797453191818897,
        0.005095208577250613,
    ),
    (
        &[
            -0.9715, 0.8766, -1.1953, -1.367, -0.5485, 0.0921, -1.521, -0.5042, -0.004, -0.0356, 0.8756, 0.7843,
        ],
        0.9221195126194575,
        0.30395910703608997,
    ),
    (
        &[
            0.1317, 2.5042, 0.3707, 1.689, 0.2777, 0.8144, 0.4433, 0.4594, 2.0198, 0.4733, 0.7312, 0.0686, 0.5187,
            0.2724, 0.0227,
        ],
        0.7900051899507033,
        0.0027441160598473996,
    ),
    (
        &[
            0.545, 0.5278, 0.4397, 0.2983, 0.0243, 0.1241, 0.5619, 0.2257, 0.2451, 0.8116, 0.645, 0.4105, 0.6969,
            0.5629, 0.1094, 0.868, 0.5155, 0.3434, 0.4909, 0.3947,
        ],
        0.9816775839839678,
        0.9538714557993845,
    ),
    (
        &[
            0.7046, 0.3622, 1.222, 0.4119, 2.1563, 1.1085, 1.7643, 1.1206, 2.3794, 0.7265, 1.0357, 2.6647, 0.4144,
            1.1443, 1.9792, 0.475, 0.6127, 0.4169, 2.2854, 0.8758, 0.802,
        ],
        0.882410515637589,
        0.01619461581550727,
    ),
    (
        &[
            -1.4125, -1.0638, 0.9265, -0.1895, -0.4009, 0.7919, -0.9059, 1.6134, -0.3682, -0.513, -0.2652, 0.0373,
            0.7012, -0.6988, -0.824, 0.0382, 0.3389, 0.8773, -0.4768, 0.967, -1.0199, 1.3858, -1.0921, -0.0863, 0.1953,
        ],
        0.9626714388836993,
        0.47020727467503065,
    ),
    (
        &[
            0.1648, 0.5542, 0.0461, 0.1432, 1.406, 1.3926, 0.0836, 1.6859, 0.231, 0.4971, 0.8436, 2.186, 0.1487,
            0.0561, 0.67, 0.0517, 0.2686, 0.2607, 0.0097, 0.624, 0.3591, 1.0707, 1.1505, 1.9192, 1.2238, 0.4075,
            0.3622, 0.1807, 0.6056, 0.8378,
        ],
        0.8770768342244104,
        0.0024171705306001005,
    ),
    (
        &[
            0.5184, 0.1678, 0.4212, 0.8776, 0.1014, 0.0788, 0.8718, 0.9977, 0.8676, 0.1914, 0.1802, 0.8561, 0.7985,
            0.0538, 0.7819, 0.2828, 0.5577, 0.3841, 0.496, 0.1619, 0.4271, 0.6325, 0.9833, 0.8567, 0.289, 0.5015,
            0.5869, 0.3097, 0.2851, 0.009, 0.5168, 0.3449, 0.3354, 0.4819, 0.2921, 0.8429, 0.1047, 0.0806, 0.8446,
            0.5497,
        ],
        0.9373979580939062,
        0.02827878842076422,
    ),
    (
        &[
            2.3971, 1.6358, 0.9575, 0.5371, 1.2303, 0.9533, 1.7771, 1.3123, 1.6659, 0.3491, 0.5481, 1.1183, 1.2946,
            0.646, 0.6118, 0.9812, 1.0914, 3.9543, 0.7643, 1.4568, 0.3015, 0.9321, 0.7986, 0.4058, 0.5069, 0.6365,
            0.5785, 0.2649, 0.7972, 0.9331, 0.8071, 1.7683, 0.8872, 1.072, 0.9752, 1.0853, 0.4763, 0.818, 3.5059,
            1.2567, 0.8916, 0.7298, 1.3032, 1.004, 1.1635, 1.8452, 1.1064, 0.9389, 0.6508, 0.3953,
        ],
        0.7788403326282467,
        2.950743962962982e-07,
    ),
    (
        &[
            0.4267, 0.3581, -0.6598, -0.5586, -1.0934, -0.9894, -0.348, -0.0601, 0.8732, 0.5613, -0.5458, 0.8098,
            -1.9486, -0.393, 0.4827, 1.4741, -1.6445, -1.2079, -0.4991, -1.5713, -0.0475, 0.2596, -0.269, -0.8838,
            1.8752, 1.5751, 0.3047, 1.4665, -0.7931, -1.33, 0.2526, 1.8032, -0.2284, 0.754, 1.2588, 0.0445, 0.841,
            -0.6608, 1.2901, 0.4211, 0.0675, -0.6298, -2.8555, 0.3189, 0.003, -0.1162, -0.3973, 1.8846, -0.0867,
            -0.0816, -0.0034, -1.0721, -0.5364, -0.3443, 0.3168, 0.5983, -0.7553, 1.0568, -2.3901, 1.5139, 0.6583,
            0.8263, 0.1393, 0.4136, 0.3313, -0.3473, -0.9087, 0.4187, 0.2696, -0.6726, 0.0587, -0.7266, 2.3947, 0.547,
            0.6458,
        ],
        0.9892327326429522,
        0.7809624600883188,
    ),
    (
        &[
            1.7279, 1.2927, 0.2798, 0.3792, 4.3842, 1.7623, 0.0775, 3.0952, 0.7236, 0.1881, 0.0747, 1.6148, 0.7647,
            0.1267, 2.1887, 1.7573, 1.9475, 0.6807, 0.4396, 0.1146, 0.0959, 0.1847, 0.7414, 1.2084, 1.1686, 4.7657,
            0.3959, 0.3572, 0.0995, 1.0677, 1.5967, 5.2865, 0.2597, 0.374, 0.8288, 0.286, 0.074, 0.1186, 0.3221,
            0.1615, 0.0219, 0.1206, 5.0248, 1.2947, 0.7502, 1.897, 0.9508, 0.7173, 3.012, 0.2887, 0.8204, 0.1186,
            0.0023, 0.1824, 0.5117, 2.2233, 0.1851, 0.1234, 0.7138, 1.4545, 0.2987, 0.2352, 0.179, 0.2034, 0.8817,
            3.4216, 0.085, 2.1948, 1.5626, 1.5366, 0.9117, 0.2871, 1.2973, 1.2385, 0.2474, 3.6667, 0.0787, 1.7569,
            0.5234, 0.2436, 0.0649, 3.0334, 0.0202, 0.6022, 0.6646, 1.7529, 0.3145, 1.1049, 1.0364, 0.1895, 0.9261,
            1.4066, 2.6034, 0.3038, 2.0094, 1.5953, 0.2554, 0.3225, 0.0762, 1.073,
        ],
        0.7874919030359621,
        1.0408344956377443e-10,
    ),
    (
        &[
            0.0098, 0.2881, 0.652, 0.4195, 0.8331, 0.9672, 0.3503, 0.9915, 0.7985, 0.154, 0.567, 0.7293, 0.3354,
            0.8003, 0.8546, 0.1741, 0.3756, 0.8667, 0.3732, 0.6984, 0.2514, 0.9686, 0.7649, 0.7747, 0.0649, 0.3869,
            0.0308, 0.1103, 0.1563, 0.373, 0.5404, 0.0454, 0.8936, 0.9752, 0.6442, 0.1426, 0.6104, 0.6073, 0.767,
            0.6308, 0.4707, 0.3772, 0.58, 0.333, 0.5954, 0.0707, 0.8175, 0.6169, 0.7078, 0.9326, 0.2879, 0.7018,
            0.5274, 0.5476, 0.7429, 0.6615, 0.2615, 0.5453, 0.7096, 0.8089, 0.3456, 0.847, 0.7077, 0.0384, 0.5752,
            0.8352, 0.9937, 0.9646, 0.566, 0.7803, 0.6581, 0.2166, 0.6822, 0.6262, 0.3071, 0.4643, 0.6147, 0.9331,
            0.5328, 0.5459, 0.3034, 0.8481, 0.8795, 0.7141, 0.0158, 0.3861, 0.227, 0.7746, 0.836, 0.0704, 0.8228,
            0.5425, 0.8903, 0.8774, 0.9048, 0.9778, 0.7523, 0.7362, 0.8895, 0.4515, 0.9348, 0.4516, 0.1672, 0.3127,
            0.5984, 0.4796, 0.2164, 0.2334, 0.9103, 0.769, 0.1071, 0.7481, 0.1407, 0.6139, 0.6333, 0.4604, 0.7823,
            0.1106, 0.2936, 0.1311, 0.343, 0.7249, 0.2079, 0.0553, 0.5461, 0.7255, 0.26, 0.9461, 0.8506, 0.9544,
            0.4309, 0.0839, 0.2911, 0.5001, 0.2218, 0.1941, 0.0464, 0.538, 0.8064, 0.1463, 0.0857, 0.8706, 0.731,
            0.3286, 0.8011, 0.0142, 0.27, 0.527, 0.0298, 0.5627, 0.1959, 0.5612, 0.5212, 0.7875, 0.1569, 0.2314,
            0.4684, 0.9207, 0.4632, 0.3154, 0.9064, 0.6475, 0.7041, 0.3642, 0.2818, 0.3425, 0.0822, 0.3986, 0.3093,
            0.5759, 0.9969, 0.0864, 0.1845, 0.9731, 0.4794, 0.8553, 0.7388, 0.0358, 0.5482, 0.5251, 0.8123, 0.9107,
            0.3839, 0.0857, 0.7663, 0.2596, 0.6922, 0.8898, 0.0626, 0.9573, 0.3993, 0.0693, 0.7536, 0.9486, 0.3905,
            0.3195, 0.6754, 0.8401, 0.6352, 0.1683,
        ],
        0.949677631858056,
        1.756811580053411e-06,
    ),
    (
        &[
            0.4433, 0.3049, 3.3778, 0.3468, 0.4057, 0.3954, 1.2261, 1.7633, 1.0411, 3.1416, 1.0537, 1.1526, 1.1531,
            0.7257, 0.9456, 1.7343, 0.5706, 0.8811, 1.1653, 1.1288, 0.9261, 0.4256, 1.6429, 0.8645, 10.5009, 0.3254,
            2.7565, 2.1956, 1.9792, 0.6557, 0.7808, 0.9523, 0.6747, 0.8363, 0.5706, 0.5768, 2.2453, 0.1827, 1.368,
            1.4023, 5.3336, 0.482, 0.5114, 2.8127, 1.3132, 0.4734, 1.708, 0.7341, 1.7307, 0.4929, 1.5445, 4.087,
            0.6049, 0.7515, 0.2324, 5.2537, 1.0986, 1.8889, 0.4653, 2.1727, 0.3541, 0.5431, 0.8122, 12.119, 0.4023,
            2.9044, 0.5664, 1.1632, 0.664, 0.548, 6.4609, 1.2796, 2.6588, 3.5425, 1.39, 0.5315, 1.7243, 0.5235, 0.9458,
            4.4496, 3.5263, 0.7685, 0.5266, 0.4721, 2.4743, 1.0888, 1.9793, 1.465, 1.3475, 0.688, 4.0201, 0.5152,
            3.0151, 1.1791, 1.9601, 1.3497, 0.5117, 1.6562, 1.0049, 0.7236, 1.0458, 1.0888, 0.7983, 0.537, 0.71,
            2.4054, 0.3176, 0.9909, 1.1596, 1.2504, 0.7544, 0.4759, 0.7695, 1.1198, 0.409, 1.9372, 0.9021, 0.4205,
            0.4965, 1.3336, 2.04, 1.15, 0.8356, 0.6644, 0.6443, 0.5177, 0.9178, 2.1763, 1.038, 0.7275, 0.7251, 1.5362,
            1.35, 3.0898, 2.8852, 0.6793, 1.5529, 0.6221, 0.9582, 1.1688, 0.8011, 0.75, 1.4396, 2.9776, 1.3272, 1.9922,
            0.787, 1.3804, 2.155, 1.9431, 1.3327, 0.5405, 0.2673, 1.0869, 0.4216, 2.2046, 0.4777, 1.6728, 0.227,
            0.5782, 1.0856, 2.7498, 1.4367, 0.8505, 1.951, 1.7968, 1.0937, 1.3037, 1.7472, 0.6839, 1.4226, 1.6405,
            1.6245, 2.1255, 1.4967, 4.1903, 0.9864, 1.0992, 1.1138, 0.5598, 1.0458, 0.6336, 1.2272, 0.6815, 0.6957,
            1.4823, 1.0619, 0.3955, 0.4901, 0.4136, 0.9802, 0.4321, 2.336, 0.5554, 1.3334, 2.5791, 1.0114, 0.5973,
            0.4517, 0.6224, 0.4565, 0.4594, 0.9683, 1.4891, 2.1112, 0.6637, 0.6634, 0.9385, 1.3831, 0.5916, 1.2015,
            0.8957, 1.8886, 0.4901, 4.7133, 0.5629, 0.2414, 1.6985, 2.483, 0.7755, 0.5968, 1.8267, 1.3328, 2.034,
            0.6967, 0.2688, 0.712, 0.9449, 2.0679, 2.2587, 0.3827, 1.1142, 1.1211, 1.4786, 2.1911, 1.3512, 1.7687,
            0.2923, 4.4873, 4.3156, 1.5365, 2.679, 1.0327, 0.9331, 0.3797, 0.4149, 1.669, 2.7097, 1.4537, 3.1312,
            0.8797, 1.4343, 4.1771, 1.0521, 1.4374, 1.3219, 2.4315, 4.5143, 0.5744, 0.6387, 0.6505, 1.0812, 0.7373,
            2.122, 1.5106, 0.8732, 1.2294, 1.2248, 0.7265, 1.0327, 0.2888, 1.1396, 0.5719, 1.2086, 2.4389, 1.4116,
            0.7619, 1.0235, 0.6488, 0.2862, 1.135, 1.5014, 1.3373, 2.2345, 1.015, 0.5564, 0.4368, 0.2341, 1.373,
            2.5664, 2.1533, 0.4763, 2.8744, 0.2111, 0.3722, 0.2894, 1.6824, 0.3142, 1.0393, 0.3755, 0.6781, 2.0811,
            0.2679, 10.5696, 0.6904, 0.6415, 1.5886, 0.639, 1.9502, 0.9447, 0.5375, 0.965, 0.4557, 1.3298, 0.7316,
            0.8511, 2.1847, 5.2775, 2.041, 0.8427, 0.6778, 1.9863, 0.6597, 1.3215, 0.3522, 0.8532, 0.7791, 0.3449,
            1.7523, 0.2836, 0.6644, 3.1608, 1.2368, 0.1399, 1.162, 0.7594, 0.8285, 0.1987, 1.2581, 0.0843, 1.4123,
            1.5744, 1.4547, 0.6229, 1.8916, 0.4939, 0.6535, 1.264, 1.885, 1.7872, 0.8244, 2.6686, 1.3554, 4.0822,
            0.6269, 0.5744, 0.7993, 2.562, 1.0446, 0.9174, 0.9738, 1.2428, 2.0395, 0.295, 0.4446, 1.545, 4.1985,
            2.8762, 0.2868, 1.4343, 0.6935, 0.556, 1.1464, 0.4657, 4.2578, 0.8523, 0.5599, 0.8309, 1.9083, 4.5351,
            0.6334, 0.4691, 0.8714, 0.4338, 0.5766, 0.5897, 0.6226, 1.8104, 2.7397, 1.4157, 0.7585, 0.6093, 1.1377,
            0.7658, 0.6962, 1.5365, 0.2344, 1.7893, 1.1952, 1.8033, 2.6114, 0.6972, 2.0052, 0.8657, 2.26, 0.759,
            5.5363, 2.2596, 0.5744, 0.9109, 1.8991, 3.8294, 0.3623, 2.1412, 0.8157, 0.6543, 0.7177, 0.572, 1.584,
            1.3504, 0.8919, 3.5576, 0.8139, 1.0041, 0.9152, 0.8105, 0.5029, 0.625, 1.5888, 1.4954, 2.5907, 1.8273,
            1.0586, 0.8947, 2.1934, 0.7794, 0.8982, 0.6661, 0.4515, 1.2626, 0.4406, 2.3991, 0.6081, 1.1446, 0.5757,
            0.5426, 0.4098, 1.2788, 1.0123, 2.9722, 3.0278, 1.3371, 1.502, 2.3869, 1.0747, 1.5873, 1.4495, 1.6573,
            1.9096, 1.0668, 0.4147, 0.3555, 0.9801, 2.1871, 4.6322, 0.6448, 0.7442, 1.465, 1.1083, 1.8149, 2.7347,
            5.0536, 0.7248, 1.0033, 0.7457, 3.1899, 2.0813, 2.1023, 0.9813, 1.2529, 1.3909, 0.2883, 0.9916, 0.8637,
            1.3425, 0.9328, 0.3978, 1.6522, 0.996, 0.3883, 0.9849, 0.7099, 0.7858, 2.0925, 1.3528, 1.5509, 0.5495,
            0.93, 0.3469, 0.4236,
        ],
        0.6887525911269505,
        2.5391279483602345e-29,
    ),
];
