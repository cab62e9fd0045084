"""Small charts shared by the tests."""

from codazzi.geometry import ChartManifold


def flat(n, fields=None, points=None):
    coords = ["x", "y", "z", "w"][:n] if n <= 4 else [f"x{i}" for i in range(n)]
    metric = [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    return ChartManifold.from_strings(coords, metric, fields, points, f"flat{n}")


def polar():
    return ChartManifold.from_strings(["r", "th"], {("r", "r"): "1", ("th", "th"): "r^2"})


def sphere2(radius=1.0, fields=None, points=None):
    a = f"{radius * radius!r}"
    return ChartManifold.from_strings(
        ["th", "ph"], {("th", "th"): a, ("ph", "ph"): f"{a}*sin(th)^2"}, fields, points, "s2"
    )


def sphere3(fields=None, points=None):
    return ChartManifold.from_strings(
        ["chi", "th", "ph"],
        {("chi", "chi"): "1", ("th", "th"): "sin(chi)^2", ("ph", "ph"): "sin(chi)^2*sin(th)^2"},
        fields,
        points,
        "s3",
    )


def s2xs2(fields=None, points=None):
    return ChartManifold.from_strings(
        ["t1", "p1", "t2", "p2"],
        {("t1", "t1"): "1", ("p1", "p1"): "sin(t1)^2", ("t2", "t2"): "4", ("p2", "p2"): "4*sin(t2)^2"},
        fields,
        points,
        "s2xs2",
    )


WARPED_METRIC = {("r", "r"): "1", ("x", "x"): "(1 + r^2)^2", ("y", "y"): "(1 + r^2)^2", ("z", "z"): "(1 + r^2)^2"}
WARPED_B0 = {("r", "r"): "2*(1 + r^2)", ("x", "x"): "(1 + r^2)^3", ("y", "y"): "(1 + r^2)^3", ("z", "z"): "(1 + r^2)^3"}


def warped(fields=None, points=None):
    fs = {"b0": ("sym2", WARPED_B0)}
    fs.update(fields or {})
    return ChartManifold.from_strings(["r", "x", "y", "z"], WARPED_METRIC, fs, points, "warped4d")


BUMP_METRIC = {
    ("x1", "x1"): "1",
    ("x2", "x2"): "1 + 0.1*x1^3",
    ("x3", "x3"): "1",
    ("x4", "x4"): "1 + 0.1*x1*x3^2",
}


def bump(fields=None, points=None):
    fs = {"b_diag": ("sym2", {("x1", "x1"): "1", ("x2", "x2"): "2", ("x3", "x3"): "3", ("x4", "x4"): "4"})}
    fs.update(fields or {})
    return ChartManifold.from_strings(["x1", "x2", "x3", "x4"], BUMP_METRIC, fs, points, "bump4d")
