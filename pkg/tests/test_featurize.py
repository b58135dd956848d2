"""Featurizer tests: hand-mapped index vectors and schema invariants."""

import numpy as np
import pytest

from molscreen.featurize import (
    ATOM_FEATURE_WIDTHS,
    BOND_FEATURE_WIDTHS,
    DEFAULT_SCHEMA,
    FeatureSchema,
    SchemaError,
    featurize,
    featurize_smiles,
)
from molscreen.smiles import Atom, Bond, BondOrder, MolGraph, parse_smiles


def atom_row(smiles, idx=0):
    return tuple(featurize_smiles(smiles).atom_indices[idx])


def bond_row(smiles, idx=0):
    return tuple(featurize_smiles(smiles).bond_indices[idx])


class TestSchema:
    def test_widths(self):
        assert ATOM_FEATURE_WIDTHS == (119, 16, 11, 4, 9, 2, 5)
        assert BOND_FEATURE_WIDTHS == (7, 4, 2)
        assert DEFAULT_SCHEMA.total_atom_width == 166
        assert DEFAULT_SCHEMA.total_bond_width == 13

    def test_hash_is_stable_hex(self):
        h = DEFAULT_SCHEMA.schema_hash()
        assert h == FeatureSchema().schema_hash()
        assert len(h) == 64
        int(h, 16)

    def test_hash_changes_with_widths(self):
        other = FeatureSchema(atom_widths=(119, 16, 11, 4, 9, 2, 6))
        assert other.schema_hash() != DEFAULT_SCHEMA.schema_hash()


class TestAtomRows:
    # Columns: atomic type, formal charge, degree, chirality, numH,
    # aromaticity, hybridization (s=0, sp=1, sp2=2, sp3=3, misc=4).

    def test_benzene_carbon(self):
        assert atom_row("c1ccccc1") == (6, 7, 2, 0, 1, 1, 2)

    def test_methane(self):
        assert atom_row("C") == (6, 7, 0, 0, 4, 0, 3)

    def test_ammonium(self):
        assert atom_row("[NH4+]") == (7, 8, 0, 0, 4, 0, 3)

    def test_carbon_dioxide_center_is_sp(self):
        assert atom_row("O=C=O", 1) == (6, 7, 2, 0, 0, 0, 1)

    def test_nitrile(self):
        assert atom_row("C#N", 0) == (6, 7, 1, 0, 1, 0, 1)
        assert atom_row("C#N", 1) == (7, 7, 1, 0, 0, 0, 1)

    def test_ethene_carbon_is_sp2(self):
        assert atom_row("C=C") == (6, 7, 1, 0, 2, 0, 2)

    def test_ketone_carbon_is_sp2(self):
        assert atom_row("CC(=O)C", 1) == (6, 7, 3, 0, 0, 0, 2)

    def test_pyridine_nitrogen(self):
        assert atom_row("c1ccncc1", 3) == (7, 7, 2, 0, 0, 1, 2)

    def test_thiophene_sulfur(self):
        assert atom_row("c1ccsc1", 3) == (16, 7, 2, 0, 0, 1, 2)

    def test_fluorine_is_sp3(self):
        assert atom_row("FC(F)(F)F", 0) == (9, 7, 1, 0, 0, 0, 3)

    def test_chirality_indices(self):
        assert atom_row("N[C@@H](C)O", 1)[3] == 1
        assert atom_row("N[C@H](C)O", 1)[3] == 2

    def test_negative_charge(self):
        assert atom_row("CC(=O)[O-]", 3)[1] == 6

    def test_charge_out_of_range_maps_to_misc(self):
        assert atom_row("[O-8]")[1] == 15
        assert atom_row("[O+9]")[1] == 15

    def test_bare_sodium_cation_is_misc_hybridization(self):
        assert atom_row("[Na+]") == (11, 8, 0, 0, 0, 0, 4)

    def test_hydrogen_count_clamps_at_eight(self):
        assert atom_row("[CH9]")[4] == 8

    def test_unknown_atomic_number_maps_to_misc(self):
        graph = MolGraph.from_atoms_and_bonds([Atom(atomic_number=200)], [])
        assert featurize(graph).atom_indices[0][0] == 0

    def test_degree_clamps_at_ten(self):
        atoms = [Atom(atomic_number=6) for _ in range(12)]
        bonds = [Bond(a=0, b=i, order=BondOrder.SINGLE) for i in range(1, 12)]
        graph = MolGraph.from_atoms_and_bonds(atoms, bonds)
        assert featurize(graph).atom_indices[0][2] == 10


class TestBondRows:
    def test_benzene_bond(self):
        assert bond_row("c1ccccc1") == (0, 3, 1)

    def test_ethane_bond(self):
        assert bond_row("CC") == (0, 0, 0)

    def test_ethene_bond(self):
        assert bond_row("C=C") == (0, 1, 0)

    def test_triple_bond(self):
        assert bond_row("C#N") == (0, 2, 0)

    def test_directional_bond(self):
        assert bond_row("C/C=C/C", 0) == (1, 0, 0)
        assert bond_row("C/C=C\\C", 2) == (2, 0, 0)

    def test_ring_bond_flag(self):
        assert bond_row("C1CC1", 0) == (0, 0, 1)
        assert bond_row("CC1CC1", 0) == (0, 0, 0)


class TestArrays:
    def test_shapes_and_dtypes(self):
        fg = featurize_smiles("CC(=O)O")
        assert fg.n_atoms == 4
        assert fg.atom_indices.shape == (4, 7)
        assert fg.bond_indices.shape == (3, 3)
        assert fg.bond_endpoints.shape == (3, 2)
        assert fg.atom_indices.dtype == np.int64
        assert fg.bond_indices.dtype == np.int64
        assert fg.bond_endpoints.dtype == np.int64

    def test_endpoints_match_graph(self):
        graph = parse_smiles("CC(=O)O")
        fg = featurize(graph)
        assert fg.bond_endpoints.tolist() == [[b.a, b.b] for b in graph.bonds]

    def test_molecule_without_bonds(self):
        fg = featurize_smiles("C")
        assert fg.bond_indices.shape == (0, 3)
        assert fg.bond_endpoints.shape == (0, 2)

    @pytest.mark.parametrize(
        "smiles",
        ["C", "CCO", "c1ccccc1", "CC(=O)[O-]", "C1CCC2CCCCC2C1", "N#Cc1ccccc1"],
    )
    def test_indices_in_schema_range(self, smiles):
        fg = featurize_smiles(smiles)
        for col, width in enumerate(ATOM_FEATURE_WIDTHS):
            assert np.all(fg.atom_indices[:, col] >= 0)
            assert np.all(fg.atom_indices[:, col] < width)
        for col, width in enumerate(BOND_FEATURE_WIDTHS):
            assert np.all(fg.bond_indices[:, col] >= 0)
            assert np.all(fg.bond_indices[:, col] < width)

    def test_atom_order_follows_input_order(self):
        fg = featurize_smiles("CCO")
        assert fg.atom_indices[2][0] == 8

    def test_isomorphic_rewrites_give_same_multisets(self):
        for left, right in [("CCO", "OCC"), ("Cc1ccccc1", "c1ccccc1C")]:
            a = featurize_smiles(left)
            b = featurize_smiles(right)
            assert sorted(map(tuple, a.atom_indices)) == sorted(
                map(tuple, b.atom_indices)
            )
            assert sorted(map(tuple, a.bond_indices)) == sorted(
                map(tuple, b.bond_indices)
            )

    def test_bad_schema_width_raises(self):
        narrow = FeatureSchema(atom_widths=(119, 16, 11, 4, 3, 2, 5))
        with pytest.raises(SchemaError):
            featurize(parse_smiles("C"), schema=narrow)
