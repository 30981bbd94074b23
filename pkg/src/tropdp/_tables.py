"""Frozen combinatorial data: the 36 positive roots, the 40 degree-9
Yoshida root products, the 135 Cross binomials, and the anticanonical
triangle order attached to consecutive Cross triples."""

# coefficient 6-tuples over d1..d6
ROOTS = (
    (-1, 1, 0, 0, 0, 0),
    (1, 1, 1, 0, 0, 0),
    (0, -1, 1, 0, 0, 0),
    (0, 0, -1, 1, 0, 0),
    (0, 0, 0, -1, 1, 0),
    (0, 0, 0, 0, -1, 1),
    (0, -1, 0, 1, 0, 0),
    (1, 1, 0, 1, 0, 0),
    (0, 0, 0, -1, 0, 1),
    (-1, 0, 1, 0, 0, 0),
    (0, 0, -1, 0, 1, 0),
    (0, -1, 0, 0, 1, 0),
    (-1, 0, 0, 1, 0, 0),
    (1, 1, 0, 0, 1, 0),
    (0, 0, -1, 0, 0, 1),
    (1, 0, 1, 1, 0, 0),
    (0, 1, 1, 1, 0, 0),
    (1, 1, 0, 0, 0, 1),
    (0, -1, 0, 0, 0, 1),
    (-1, 0, 0, 0, 1, 0),
    (1, 0, 1, 0, 1, 0),
    (1, 0, 0, 1, 1, 0),
    (0, 1, 1, 0, 1, 0),
    (1, 0, 1, 0, 0, 1),
    (-1, 0, 0, 0, 0, 1),
    (0, 1, 1, 0, 0, 1),
    (0, 1, 0, 1, 1, 0),
    (1, 0, 0, 1, 0, 1),
    (1, 0, 0, 0, 1, 1),
    (0, 0, 1, 1, 1, 0),
    (0, 1, 0, 1, 0, 1),
    (0, 1, 0, 0, 1, 1),
    (0, 0, 1, 1, 0, 1),
    (0, 0, 1, 0, 1, 1),
    (0, 0, 0, 1, 1, 1),
    (1, 1, 1, 1, 1, 1),
)

# each Yoshida is the product of these nine roots (indices into ROOTS)
YOSHIDA_ROOTS = (
    (2, 8, 10, 11, 12, 22, 24, 27, 35),
    (1, 4, 9, 18, 21, 23, 29, 30, 31),
    (4, 9, 15, 17, 18, 20, 25, 26, 34),
    (2, 3, 5, 6, 16, 19, 24, 28, 35),
    (1, 2, 8, 19, 21, 22, 28, 30, 32),
    (2, 5, 7, 12, 15, 22, 25, 28, 34),
    (0, 3, 5, 13, 15, 16, 17, 33, 34),
    (6, 8, 9, 10, 18, 19, 20, 30, 35),
    (5, 6, 7, 9, 16, 20, 23, 31, 34),
    (3, 16, 17, 18, 19, 20, 21, 31, 32),
    (2, 8, 13, 16, 19, 20, 25, 27, 34),
    (1, 2, 5, 12, 16, 21, 27, 31, 33),
    (8, 9, 11, 13, 15, 22, 23, 30, 34),
    (6, 7, 14, 19, 20, 25, 26, 28, 32),
    (11, 12, 13, 14, 15, 25, 26, 27, 33),
    (6, 13, 14, 16, 19, 21, 23, 30, 33),
    (2, 4, 16, 17, 21, 22, 23, 24, 34),
    (3, 5, 9, 11, 12, 15, 18, 31, 35),
    (1, 2, 4, 24, 25, 26, 27, 28, 29),
    (7, 10, 12, 18, 20, 25, 27, 29, 31),
    (0, 5, 6, 7, 10, 12, 14, 33, 35),
    (1, 5, 6, 9, 15, 26, 28, 30, 33),
    (0, 1, 2, 4, 5, 8, 9, 34, 35),
    (0, 7, 8, 10, 17, 20, 22, 32, 34),
    (7, 11, 12, 14, 21, 22, 23, 31, 32),
    (2, 4, 12, 14, 18, 19, 21, 25, 35),
    (0, 1, 8, 10, 13, 27, 29, 30, 33),
    (6, 7, 10, 22, 23, 24, 28, 29, 30),
    (3, 13, 15, 18, 19, 25, 28, 29, 30),
    (3, 11, 13, 16, 23, 24, 27, 29, 31),
    (0, 4, 7, 13, 14, 23, 25, 29, 34),
    (4, 6, 9, 11, 14, 23, 24, 26, 35),
    (10, 12, 15, 17, 18, 21, 22, 30, 33),
    (3, 11, 15, 17, 22, 24, 26, 28, 32),
    (6, 10, 16, 17, 20, 24, 26, 27, 33),
    (0, 3, 4, 10, 17, 18, 24, 29, 35),
    (0, 3, 8, 11, 13, 14, 19, 32, 35),
    (0, 1, 3, 5, 7, 28, 29, 31, 32),
    (0, 1, 4, 14, 17, 21, 26, 32, 33),
    (1, 8, 9, 11, 20, 26, 27, 31, 32),
)

# C_k = s1*Y_i1 + s2*Y_i2 stored as ((s1, i1), (s2, i2))
CROSS_BINOMIALS = (
    ((-1, 12), (1, 36)),
    ((-1, 2), (1, 35)),
    ((1, 20), (-1, 8)),
    ((1, 30), (-1, 36)),
    ((1, 1), (-1, 17)),
    ((1, 27), (-1, 33)),
    ((-1, 21), (-1, 32)),
    ((-1, 39), (-1, 9)),
    ((-1, 16), (1, 18)),
    ((-1, 29), (1, 9)),
    ((1, 12), (-1, 4)),
    ((1, 25), (1, 30)),
    ((1, 35), (-1, 7)),
    ((-1, 37), (-1, 4)),
    ((-1, 10), (-1, 6)),
    ((1, 17), (-1, 32)),
    ((-1, 27), (-1, 31)),
    ((-1, 39), (1, 4)),
    ((-1, 12), (-1, 29)),
    ((-1, 21), (1, 37)),
    ((-1, 19), (-1, 7)),
    ((1, 27), (1, 35)),
    ((1, 4), (1, 9)),
    ((1, 5), (1, 6)),
    ((-1, 24), (1, 30)),
    ((1, 26), (-1, 39)),
    ((-1, 17), (-1, 28)),
    ((1, 12), (-1, 24)),
    ((-1, 19), (1, 2)),
    ((1, 11), (-1, 21)),
    ((-1, 10), (1, 4)),
    ((-1, 34), (-1, 38)),
    ((-1, 19), (1, 37)),
    ((1, 2), (-1, 30)),
    ((1, 15), (-1, 21)),
    ((1, 24), (-1, 39)),
    ((-1, 26), (1, 37)),
    ((-1, 34), (-1, 8)),
    ((-1, 12), (-1, 33)),
    ((-1, 18), (-1, 26)),
    ((-1, 16), (-1, 23)),
    ((1, 13), (-1, 15)),
    ((1, 14), (-1, 31)),
    ((1, 10), (-1, 16)),
    ((1, 1), (1, 28)),
    ((-1, 1), (1, 38)),
    ((-1, 34), (1, 7)),
    ((1, 17), (-1, 33)),
    ((1, 18), (-1, 19)),
    ((-1, 24), (1, 4)),
    ((1, 21), (-1, 8)),
    ((1, 7), (-1, 8)),
    ((-1, 26), (1, 30)),
    ((-1, 11), (1, 25)),
    ((1, 18), (-1, 39)),
    ((-1, 3), (-1, 36)),
    ((-1, 12), (1, 16)),
    ((-1, 12), (-1, 27)),
    ((-1, 14), (-1, 18)),
    ((-1, 17), (1, 3)),
    ((-1, 0), (-1, 35)),
    ((-1, 10), (-1, 30)),
    ((1, 37), (-1, 39)),
    ((1, 12), (-1, 8)),
    ((1, 28), (1, 3)),
    ((-1, 11), (1, 14)),
    ((1, 23), (-1, 38)),
    ((1, 31), (1, 8)),
    ((1, 14), (-1, 19)),
    ((-1, 17), (1, 36)),
    ((-1, 11), (1, 38)),
    ((-1, 13), (1, 19)),
    ((1, 13), (-1, 28)),
    ((1, 1), (1, 8)),
    ((1, 38), (1, 6)),
    ((1, 28), (-1, 32)),
    ((-1, 23), (1, 37)),
    ((-1, 10), (1, 11)),
    ((1, 2), (-1, 25)),
    ((-1, 0), (1, 12)),
    ((-1, 3), (1, 8)),
    ((-1, 28), (-1, 5)),
    ((1, 1), (-1, 24)),
    ((-1, 23), (1, 26)),
    ((-1, 16), (-1, 35)),
    ((-1, 4), (-1, 7)),
    ((1, 19), (-1, 24)),
    ((-1, 13), (-1, 30)),
    ((1, 22), (-1, 39)),
    ((-1, 29), (-1, 3)),
    ((1, 1), (1, 9)),
    ((-1, 31), (1, 34)),
    ((-1, 22), (1, 23)),
    ((-1, 3), (1, 33)),
    ((1, 14), (1, 20)),
    ((1, 39), (1, 7)),
    ((1, 33), (-1, 5)),
    ((-1, 22), (1, 35)),
    ((-1, 8), (1, 9)),
    ((1, 29), (1, 39)),
    ((1, 23), (-1, 6)),
    ((1, 13), (-1, 3)),
    ((1, 14), (-1, 39)),
    ((1, 22), (1, 6)),
    ((1, 15), (-1, 4)),
    ((1, 18), (-1, 35)),
    ((-1, 36), (1, 4)),
    ((-1, 17), (1, 5)),
    ((-1, 2), (1, 31)),
    ((-1, 23), (-1, 27)),
    ((1, 10), (-1, 15)),
    ((-1, 1), (1, 19)),
    ((1, 15), (-1, 20)),
    ((1, 16), (1, 5)),
    ((1, 15), (-1, 24)),
    ((1, 0), (-1, 26)),
    ((1, 3), (-1, 37)),
    ((-1, 15), (1, 6)),
    ((-1, 13), (1, 37)),
    ((-1, 25), (-1, 35)),
    ((1, 31), (-1, 36)),
    ((1, 1), (-1, 26)),
    ((1, 34), (-1, 9)),
    ((-1, 31), (-1, 39)),
    ((-1, 25), (-1, 4)),
    ((1, 20), (-1, 23)),
    ((-1, 0), (-1, 27)),
    ((-1, 15), (1, 36)),
    ((1, 1), (-1, 39)),
    ((1, 12), (-1, 15)),
    ((1, 22), (-1, 3)),
    ((-1, 13), (1, 39)),
    ((1, 22), (-1, 7)),
    ((-1, 34), (-1, 6)),
    ((-1, 13), (1, 5)),
)

# triangle labels for consecutive Cross triples {C_{3n}, C_{3n+1}, C_{3n+2}}
TRIANGLE_ORDER = ('x31', 'x45', 'y162345', 'x12', 'y142635', 'x53', 'x41', 'x24', 'x51', 'x43', 'y152346', 'x16', 'x63', 'y152436', 'x14', 'x61', 'y132456', 'x65', 'y152634', 'y123456', 'y162435', 'x26', 'x56', 'y162534', 'x46', 'x54', 'x13', 'y123546', 'x32', 'x52', 'x35', 'x25', 'y123645', 'x36', 'x34', 'x23', 'x62', 'x15', 'x21', 'y132645', 'y142536', 'x64', 'x42', 'y142356', 'y132546')
