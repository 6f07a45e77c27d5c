"""Published month-end CET1 to total asset ratios for South African banks.

Columns run from March 2017 back to February 2015; None marks a month with
no published ratio.
"""

MONTHS = ("2017-03", "2017-02", "2016-12", "2016-09", "2016-06", "2016-03",
          "2016-02", "2015-12", "2015-09", "2015-06", "2015-03", "2015-02")

# the largest variance quoted for any bank's ratio
MAX_RATIO_VARIANCE = 0.00344

RATIOS = {
    "ABSA Bank Ltd": (0.0642, None, 0.0656, 0.0561, 0.0540, 0.0525, None, 0.0538, 0.0525, 0.0489, 0.0495, None),
    "African Bank Ltd": (0.2387, None, 0.2259, 0.2178, None, None, None, None, None, None, None, None),
    "Albaraka Bank Ltd": (None, None, 0.1057, 0.1070, 0.1094, 0.1111, None, 0.1083, None, 0.1075, 0.1089, None),
    "Bank of Baroda": (0.0459, None, 0.0578, None, 0.0410, None, None, None, None, None, None, None),
    "Bank of China LTD Jhb Branch": (None, None, 0.6626, 0.7247, 0.6865, 0.6471, None, 0.5647, 0.6692, 0.6947, 0.6733, None),
    "Bank of India - Jhb Branch": (None, None, 0.2439, 0.2544, 0.1745, 0.1895, None, 0.1929, 0.2051, 0.1664, 0.2009, None),
    "Bank of Taiwan SA Branch": (0.2483, None, None, None, None, None, None, 0.0439, None, None, None, None),
    "Bidvest Bank Ltd": (None, None, 0.7844, 0.7367, 0.6515, 0.6810, None, 0.6468, 0.6796, 0.7160, 0.7774, None),
    "BNP Paribas SA": (0.8010, None, None, None, None, None, 0.1989, None, None, None, None, 0.1956),
    "Capitec Bank": (None, 0.1990, None, None, None, None, None, None, None, None, None, None),
    "China Construction Bank": (None, None, 0.1063, None, 0.0549, 0.0618, None, 0.0407, 0.0485, 0.0482, None, None),
    "Citibank N.A": (0.0945, None, 0.0887, 0.0838, 0.0981, 0.0960, None, 0.0568, 0.0701, 0.0794, 0.0926, None),
    "Deutsche Bank AG": (0.1087, None, 0.1204, 0.1007, 0.0907, 0.0836, None, 0.0603, 0.0658, 0.0719, 0.0589, None),
    "Finbond Mutual Bank": (None, 0.2085, None, None, None, None, 0.2407, None, None, None, None, 0.2425),
    "Firststrand Bank Ltd": (0.0704, None, 0.0672, 0.0693, 0.0688, 0.0663, None, 0.0674, 0.0688, 0.0681, 0.0642, None),
    "GBS Mutual Bank": (None, None, 0.0506, 0.0654, 0.0640, 0.0702, None, 0.0571, 0.0749, 0.0725, 0.0719, None),
    "Grindrod Bank Ltd": (0.0665, None, 0.0994, 0.0965, 0.0917, 0.0862, None, 0.0826, 0.0779, 0.0787, 0.0840, None),
    "Habib Overseas Bank Ltd": (0.1146, None, 0.0785, 0.0865, 0.0741, 0.0710, None, 0.0662, 0.0646, 0.0696, None, None),
    "HBZ Bank Ltd": (0.0749, None, None, None, None, None, None, None, None, None, None, None),
    "Icici Bank Ltd": (None, None, 0.0857, 0.0827, None, 0.0813, None, None, 0.0836, None, 0.0878, None),
    "Investec Bank Ltd": (0.0854, None, 0.1136, 0.0840, 0.0721, 0.0656, None, 0.0568, 0.0849, 0.0961, 0.0785, None),
    "JPMorgan Chase Bank": (0.1313, None, 0.1649, 0.1729, 0.1789, 0.1837, None, 0.1903, 0.1964, 0.1971, 0.2039, None),
    "Mercantile Bank Ltd": (0.1714, None, 0.0575, 0.0544, 0.0556, 0.0545, None, 0.0547, 0.0524, 0.0542, 0.0572, None),
    "Nedbank Ltd": (0.0594, None, 0.1671, 0.1836, 0.1976, 0.2070, None, 0.2090, 0.1975, 0.1975, 0.1944, None),
    "Sasfin Bank Ltd": (0.1491, None, None, None, None, None, None, None, None, None, None, None),
    "Societe Generale Jhb": (None, None, None, None, None, None, None, None, None, None, None, None),
    "Standard Chartered Bank": (None, None, 0.0911, 0.0874, 0.0829, 0.0829, None, 0.0789, 0.0957, 0.0972, 0.0830, None),
    "State Bank of India": (0.1722, None, None, None, None, 0.1252, None, 0.1265, 0.1323, 0.1357, 0.1394, None),
    "The Hongkong and Shanghai Bank": (None, None, 0.0844, 0.0889, 0.0767, 0.0803, None, 0.0802, 0.0928, 0.1005, 0.1053, None),
    "The SA Bank of Athens Ltd": (0.0851, None, 0.0552, 0.0556, 0.0570, 0.0546, None, 0.0550, 0.0536, 0.0549, 0.0518, None),
    "The Standard Bank of SA Ltd": (0.0570, None, None, None, None, None, 0.0832, None, None, None, None, 0.0877),
    "Ubank Ltd": (None, 0.0857, None, None, None, None, None, None, None, None, None, None),
    "VBS Mutual Bank": (None, None, None, None, None, 0.0878, None, None, None, None, None, 0.0973),
}



def observations(bank):
    return {m: r for m, r in zip(MONTHS, RATIOS[bank]) if r is not None}
