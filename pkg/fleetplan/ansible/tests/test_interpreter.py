# coding: utf-8

import os
import shutil
import tempfile
import unittest

from fleetplan.ansible.interpreter import Modder
from fleetplan.ansible.actions import FileActions, DictActions


class ModderTest(unittest.TestCase):

    def test_dict_modify(self):
        modder = Modder()
        d = {"train": {"lr": 0.001, "batch_size": 32}}
        modder.modify({'_set': {'train.batch_size': 64, 'seed': 3}}, d)
        self.assertEqual(d, {"train": {"lr": 0.001, "batch_size": 64},
                             "seed": 3})
        modder.modify({'_inc': {'seed': 2}}, d)
        self.assertEqual(d["seed"], 5)
        modder.modify({'_inc': {'world.episodes': 4}}, d)
        self.assertEqual(d["world"], {"episodes": 4})
        modder.modify({'_mul': {'train.lr': 0.5}}, d)
        self.assertAlmostEqual(d["train"]["lr"], 0.0005)
        modder.modify({'_unset': {'seed': 1}}, d)
        self.assertNotIn("seed", d)
        self.assertRaises(ValueError, modder.modify,
                          {'_mul': {'train.missing': 2}}, d)
        self.assertRaises(ValueError, modder.modify,
                          {'_set': {'train.lr.x': 2}}, d)
        self.assertRaises(ValueError, modder.modify, {'_bogus': {}}, d)
        Modder(strict=False).modify({'_bogus': {}}, d)

    def test_file_modify(self):
        tmp = tempfile.mkdtemp()
        try:
            src = os.path.join(tmp, "metrics.jsonl")
            with open(src, "w") as f:
                f.write("{}\n")
            modder = Modder(actions=[FileActions])
            modder.modify({'_file_copy': {'dest': src + ".bak"}}, src)
            self.assertTrue(os.path.exists(src + ".bak"))
            modder.modify({'_file_delete': {'mode': "simulated"}}, src)
            self.assertTrue(os.path.exists(src))
            modder.modify({'_file_delete': {'mode': "actual"}}, src)
            self.assertFalse(os.path.exists(src))
            modder.modify({'_file_move': {'dest': src}}, src + ".bak")
            self.assertTrue(os.path.exists(src))
        finally:
            shutil.rmtree(tmp)

    def test_combined_actions(self):
        modder = Modder(actions=[DictActions, FileActions])
        self.assertIn("_set", modder.supported_actions)
        self.assertIn("_file_copy", modder.supported_actions)


if __name__ == "__main__":
    unittest.main()
