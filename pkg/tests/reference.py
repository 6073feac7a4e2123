"""Frozen reference values for the bundled sports-center case study.

Shared by the unit tests and the acceptance suite so every module checks
against the same numbers.
"""

# land use: (name, runoff coefficient, area ha, expected event runoff m3
# at a 26 mm depth)
LAND_USES = [
    ("asphalt_roof", 0.90, 12.56, 2938),
    ("concrete_asphalt_pavement", 0.90, 22.38, 5236),
    ("courts_track_field", 0.90, 2.76, 647),
    ("dry_masonry_pavement", 0.40, 0.77, 81),
    ("parking_lot", 0.20, 3.15, 164),
    ("training_field", 0.25, 0.96, 62),
    ("football_field", 0.15, 1.43, 55),
    ("green_land", 0.15, 20.59, 803),
]

COMPOSITE_PSI = 0.5945
CATCHMENT_AREA_HA = 64.61
DESIGN_DEPTH_MM = 26.0
TOTAL_RUNOFF_M3 = 9987
EXISTING_FACILITIES = [("storage_tanks", 1108), ("sunken_green", 571),
                       ("infiltration_pond", 50)]
EXISTING_TOTAL_M3 = 1729
EXISTING_DEPTH_MM = 4.50
REQUIRED_M3 = 8258

# m3 of runoff controlled per m2 of facility
UNIT_CAPACITY = {
    "bio_retention": 0.30,
    "grassed_swale": 0.15,
    "sunken_green": 0.25,
    "permeable_pavement": 0.05,
    "storage_tank": 1.00,
}

# facility areas (ha) per scenario: bio retention, grassed swale, sunken
# green, permeable pavement, storage tank
SCENARIO_AREAS = {
    "scenario_1": [0.757, 0.429, 0.847, 0.142, 0.316],
    "scenario_2": [1.035, 0.529, 0.941, 0.243, 0.189],
    "scenario_3": [0.850, 0.350, 0.305, 0.325, 0.426],
    "scenario_4": [1.125, 0.480, 1.500, 0.120, 0.035],
    "scenario_5": [0.675, 0.780, 0.850, 0.248, 0.281],
}
CAPACITY_BAND_M3 = (8248, 8268)

HIERARCHY_WEIGHTS = {
    "comprehensive": {"environmental": 0.608, "economic": 0.272, "social": 0.120},
    "environmental": {"water_quantity": 0.700, "water_quality": 0.300},
    "water_quantity": {"runoff_reduction": 0.607, "peak_reduction": 0.303,
                       "peak_delay": 0.090},
    "water_quality": {"tss_reduction": 0.466, "cod_reduction": 0.277,
                      "tn_reduction": 0.161, "tp_reduction": 0.096},
    "economic": {"construction_cost": 0.187, "maintenance_cost": 0.158,
                 "operation_performance": 0.655},
    "operation_performance": {"design_feasibility": 0.200,
                              "engineering_feasibility": 0.400,
                              "operation_stability": 0.400},
    "social": {"water_reuse": 0.648, "landscape": 0.122, "ecological": 0.230},
}

SCENARIOS = ["scenario_1", "scenario_2", "scenario_3", "scenario_4", "scenario_5"]

# raw environmental indicator values (percent; delay in minutes)
ENVIRONMENTAL_RAW = {
    "runoff_reduction": [19.3, 17.1, 17.8, 19.6, 17.3],
    "peak_reduction": [20.9, 18.7, 18.3, 21.8, 18.5],
    "peak_delay": [3, 1, 1, 2, 1],
    "tss_reduction": [21.6, 19.7, 19.7, 22.4, 19.3],
    "cod_reduction": [22.3, 20.2, 19.2, 23.1, 19.9],
    "tn_reduction": [20.5, 18.5, 18.6, 21.3, 18.2],
    "tp_reduction": [18.7, 16.5, 16.9, 19.2, 16.4],
}

# already-normalized economic and social indicator values
ECON_SOCIAL_NORMALIZED = {
    "construction_cost": [0.202, 0.199, 0.226, 0.182, 0.192],
    "maintenance_cost": [0.174, 0.222, 0.185, 0.236, 0.182],
    "design_feasibility": [0.181, 0.215, 0.200, 0.216, 0.188],
    "engineering_feasibility": [0.186, 0.207, 0.211, 0.191, 0.206],
    "operation_stability": [0.181, 0.215, 0.185, 0.231, 0.189],
    "water_reuse": [0.188, 0.211, 0.204, 0.212, 0.185],
    "landscape": [0.177, 0.221, 0.154, 0.268, 0.179],
    "ecological": [0.176, 0.220, 0.158, 0.257, 0.189],
}

# benefit scores the roll-up must reproduce within +/-0.001
EXPECTED_BENEFITS = {
    "environmental": [0.222, 0.186, 0.187, 0.220, 0.185],
    "economic": [0.185, 0.212, 0.201, 0.210, 0.192],
    "social": [0.184, 0.215, 0.188, 0.229, 0.185],
    "comprehensive": [0.208, 0.196, 0.191, 0.218, 0.187],
}
EXPECTED_RANKING = ["scenario_4", "scenario_1", "scenario_2", "scenario_3",
                    "scenario_5"]

SCENARIO_4_PROPORTIONS = {"bio_retention": 0.345, "sunken_green": 0.460}


def hierarchy_spec(env_source="direct"):
    """The case-study hierarchy as a config dict; environmental leaves can
    be bound to either the simulation or a direct table."""

    def leaf(name, weight, source, polarity="benefit"):
        return {"name": name, "weight": weight, "source": source,
                "polarity": polarity}

    w = HIERARCHY_WEIGHTS
    return {
        "name": "comprehensive",
        "children": [
            {"name": "environmental", "weight": w["comprehensive"]["environmental"],
             "children": [
                 {"name": "water_quantity", "weight": w["environmental"]["water_quantity"],
                  "children": [leaf(k, v, env_source)
                               for k, v in w["water_quantity"].items()]},
                 {"name": "water_quality", "weight": w["environmental"]["water_quality"],
                  "children": [leaf(k, v, env_source)
                               for k, v in w["water_quality"].items()]},
             ]},
            {"name": "economic", "weight": w["comprehensive"]["economic"],
             "children": [
                 leaf("construction_cost", w["economic"]["construction_cost"],
                      "direct", polarity="cost"),
                 leaf("maintenance_cost", w["economic"]["maintenance_cost"],
                      "direct", polarity="cost"),
                 {"name": "operation_performance",
                  "weight": w["economic"]["operation_performance"],
                  "children": [leaf(k, v, "direct")
                               for k, v in w["operation_performance"].items()]},
             ]},
            {"name": "social", "weight": w["comprehensive"]["social"],
             "children": [leaf(k, v, "direct") for k, v in w["social"].items()]},
        ],
    }
