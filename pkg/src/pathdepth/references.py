"""Published baseline values for the ITU-R UK Ofcom drive-test campaign.

These RMSE figures (per-city holdout and cross-city median, in dB) and
log-fit coefficients were published for this campaign; the P.1812-6 numbers
come from that recommendation's own validation on the Ofcom data. They are
embedded as labeled static references for report rendering when a dataset
is tagged as the Ofcom set, and are never computed by this package
(P.1812/Longley-Rice are out of scope). The published coefficient fits do
not state their units, so they serve as magnitude references only; this
package fixes f in MHz and d in meters.
"""

OFCOM_CITIES = ("London", "Merthyr", "Nottingham", "Southampton",
                "Stevenage", "Boston")

OFCOM_FSPL_RMSE_DB = {
    "London": 45.7,
    "Merthyr": 43.5,
    "Nottingham": 40.5,
    "Southampton": 47.1,
    "Stevenage": 45.7,
    "Boston": 31.9,
    "median": 44.6,
}

OFCOM_P1812_RMSE_DB = {
    "London": 8.8,
    "Merthyr": 13.4,
    "Nottingham": 12.6,
    "Southampton": 9.5,
    "Stevenage": 12.3,
    "Boston": 11.4,
    "median": 11.85,
}

#: Published log-fit coefficients for the London holdout, keyed by feature
#: count; ordering matches LogDistanceRegression.coeffs_ (intercept last).
OFCOM_LOGREG_COEFFS_LONDON = {
    2: (30.52, 31.08, -253.24),
    3: (18.32, 31.77, 11.03, -242.34),
    4: (20.93, 31.76, 3.96, 8.50, -247.91),
}
