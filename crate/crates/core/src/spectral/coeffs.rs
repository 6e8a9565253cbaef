//! Orthonormal scaling (reconstruction low-pass) filters.

pub(crate) const DB14: [f64; 28] = [
    0.006461153460087948,
    0.0623647588493989,
    0.2548502677926214,
    0.5543056179408938,
    0.6311878491048568,
    0.21867068775890652,
    -0.27168855227874805,
    -0.21803352999327605,
    0.1383952138648066,
    0.1399890165844607,
    -0.08674841156816969,
    -0.07154895550404614,
    0.05523712625921604,
    0.026981408307912916,
    -0.030185351540390634,
    -0.005615049530356959,
    0.01278949326633341,
    -0.000746218989268385,
    -0.0038496388680221874,
    0.001061691085606762,
    0.0007080211542355279,
    -0.0003868319473129545,
    -4.1777245770372596e-05,
    6.87550425269751e-05,
    -1.0337209184570774e-05,
    -4.389704901781394e-06,
    1.7249946753678127e-06,
    -1.7871399683113592e-07,
];

pub(crate) const SYM7: [f64; 14] = [
    0.010268176708511255,
    0.004010244871533663,
    -0.10780823770381774,
    -0.14004724044296152,
    0.2886296317515146,
    0.767764317003164,
    0.5361019170917628,
    0.017441255086855827,
    -0.049552834937127255,
    0.0678926935013727,
    0.03051551316596357,
    -0.01263630340325193,
    -0.0010473848886829163,
    0.002681814568257878,
];

pub(crate) const COIF2: [f64; 12] = [
    0.01638733646320364,
    -0.04146493678687178,
    -0.0673725547237256,
    0.3861100668227629,
    0.8127236354494135,
    0.4170051844232391,
    -0.07648859907828076,
    -0.05943441864643109,
    0.02368017194684777,
    0.005611434819368834,
    -0.0018232088709110323,
    -0.000720549445520347,
];
